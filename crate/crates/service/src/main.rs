use std::net::SocketAddr;
use std::path::PathBuf;

use clap::Parser;
use mashup_core::Library;
use mashup_service::{router, AppState, ServiceConfig};

#[derive(Debug, Parser)]
#[command(name = "mashup-service", version, about = "Serve a mashup library over HTTP")]
struct Args {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long)]
    library: PathBuf,
    /// Concurrent renders.
    #[arg(long, default_value_t = 2)]
    workers: usize,
    /// Where finished renders are kept; defaults to `<library>/.renders`.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
}

#[tokio::main]
async fn main() {
    let args = Args::parse();
    let state = AppState::new(ServiceConfig { workers: args.workers, cache_dir: args.cache_dir });

    // Serve immediately and answer 503 until the library is in.
    let loader = state.clone();
    let root = args.library.clone();
    tokio::task::spawn_blocking(move || match Library::open(&root) {
        Ok(library) => {
            eprintln!("loaded {} tracks from {}", library.len(), root.display());
            let _ = loader.set_library(library);
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    });

    let addr = SocketAddr::new(args.host, args.port);
    let listener = match tokio::net::TcpListener::bind(addr).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {addr}: {e}");
            std::process::exit(2);
        }
    };
    eprintln!("listening on http://{addr}");
    if let Err(e) = axum::serve(listener, router(state)).await {
        eprintln!("error: {e}");
        std::process::exit(2);
    }
}
