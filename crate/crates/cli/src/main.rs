use clap::Parser;

fn main() {
    let cli = mashup_cli::Cli::parse();
    let code = mashup_cli::run(cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(code);
}
