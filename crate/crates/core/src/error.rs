use thiserror::Error;

use crate::align::AlignError;
use crate::audio::AudioError;
use crate::compat::CompatError;
use crate::ingest::IngestError;
use crate::library::LibraryError;
use crate::render::RenderError;
use crate::tsm::TsmError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Any failure raised by the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Audio(#[from] AudioError),
    #[error(transparent)]
    Tsm(#[from] TsmError),
    #[error(transparent)]
    Align(#[from] AlignError),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Compat(#[from] CompatError),
    #[error(transparent)]
    Library(#[from] LibraryError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True when the failure is an I/O problem rather than bad content.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::Ingest(e) => e.is_io(),
            Error::Audio(e) => e.is_io(),
            Error::Render(RenderError::Audio(e)) => e.is_io(),
            _ => false,
        }
    }
}
