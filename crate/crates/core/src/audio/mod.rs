//! Audio buffers, WAV I/O and sample-rate conversion.

mod buffer;
mod resample;
mod wav;

use thiserror::Error;

pub use crate::ingest::Role;
pub use buffer::{AudioBuffer, Stem};
pub use resample::{resample, resample_channel, resample_to_len, KAISER_BETA, SINC_ZERO_CROSSINGS};
pub use wav::{read_wav, read_wav_from, write_wav, write_wav_to, BitDepth, WriteReport};

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported encoding: {0}")]
    UnsupportedEncoding(String),
    #[error("truncated or corrupt WAV data: {0}")]
    Truncated(String),
    #[error("invalid audio buffer: {0}")]
    InvalidBuffer(String),
}

impl AudioError {
    pub fn is_io(&self) -> bool {
        matches!(self, AudioError::Io { .. })
    }
}
