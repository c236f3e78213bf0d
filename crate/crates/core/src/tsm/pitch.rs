use super::wsola::stretch_to_len;
use super::{TsmError, TsmParams};
use crate::audio::{resample_to_len, AudioBuffer};
use crate::Real;

pub const MAX_SEMITONES: f64 = 12.0;

/// Transposes by `semitones` keeping duration: resample by
/// `2^(-semitones/12)`, then time-stretch back to the original length.
pub fn pitch_shift<T: Real>(
    audio: &AudioBuffer<T>,
    semitones: f64,
    params: &TsmParams,
) -> Result<AudioBuffer<T>, TsmError> {
    if !semitones.is_finite() || semitones.abs() > MAX_SEMITONES {
        return Err(TsmError::ShiftOutOfRange(semitones));
    }
    params.validate()?;
    if semitones == 0.0 || audio.is_empty() {
        return Ok(audio.clone());
    }
    let factor = 2f64.powf(semitones / 12.0);
    let squeezed_len = ((audio.len() as f64 / factor).round() as usize).max(1);
    let squeezed = resample_to_len(audio, squeezed_len);
    stretch_to_len(&squeezed, audio.len(), params)
}
