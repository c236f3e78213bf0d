//! Pitch-preserving time-scale modification.
//!
//! Everything here runs through one WSOLA (waveform-similarity overlap-add)
//! engine that follows an arbitrary monotone output→input time map. A
//! constant map gives plain stretching; a [`WarpMap`] gives piecewise,
//! beat-anchored warping in a single pass.

mod pitch;
mod warp;
mod wsola;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use pitch::{pitch_shift, MAX_SEMITONES};
pub use warp::{apply_warp, build_warp_map, WarpMap};
pub use wsola::{stretch_to_len, time_stretch, MAX_RATIO, MIN_RATIO};

#[derive(Debug, Error, PartialEq)]
pub enum TsmError {
    #[error("stretch ratio {0} outside [{MIN_RATIO}, {MAX_RATIO}]")]
    RatioOutOfRange(f64),
    #[error("pitch shift of {0} semitones exceeds ±{MAX_SEMITONES}")]
    ShiftOutOfRange(f64),
    #[error("invalid TSM parameters: {0}")]
    InvalidParams(String),
    #[error("warp map needs at least two strictly increasing anchors")]
    InvalidWarpMap,
    #[error("beat grid is empty: {0}")]
    EmptyGrid(&'static str),
    #[error("warp region has zero length")]
    ZeroLengthRegion,
    #[error("warp map source range [{start:.3}, {end:.3}] s does not overlap the audio (0 to {duration:.3} s)")]
    MapAudioMismatch { start: f64, end: f64, duration: f64 },
}

/// WSOLA frame geometry, in samples at the working rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TsmParams {
    pub frame_length: usize,
    pub synthesis_hop: usize,
    /// Maximum offset from the nominal analysis position searched per frame.
    pub search_radius: usize,
}

impl TsmParams {
    /// 50 ms frames, 12.5 ms hop, 10 ms search radius.
    pub fn for_rate(sample_rate: u32) -> Self {
        let ms = |m: f64| ((sample_rate as f64 * m / 1000.0).round() as usize).max(1);
        let synthesis_hop = ms(12.5).max(2);
        TsmParams {
            frame_length: synthesis_hop * 4,
            synthesis_hop,
            search_radius: ms(10.0).min(synthesis_hop - 1),
        }
    }

    pub fn validate(&self) -> Result<(), TsmError> {
        if self.synthesis_hop == 0 || self.synthesis_hop >= self.frame_length {
            return Err(TsmError::InvalidParams(format!(
                "synthesis hop {} must be in (0, frame length {})",
                self.synthesis_hop, self.frame_length
            )));
        }
        if self.search_radius >= self.synthesis_hop {
            return Err(TsmError::InvalidParams(format!(
                "search radius {} must be below synthesis hop {}",
                self.search_radius, self.synthesis_hop
            )));
        }
        Ok(())
    }
}
