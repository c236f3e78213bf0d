//! Executes a [`MashupPlan`] against the two stems and mixes the result.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::align::MashupPlan;
use crate::audio::{resample, AudioBuffer, AudioError, BitDepth, Stem};
use crate::tsm::{apply_warp, pitch_shift, TsmError, TsmParams};
use crate::Real;

/// Total length of the equal-power crossfade around each placement boundary.
pub const CROSSFADE_SECONDS: f64 = 0.010;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("{what} stem is {found} but the plan expects {expected}")]
    StemMismatch { what: &'static str, expected: String, found: String },
    #[error("{0}")]
    InvalidSettings(String),
    #[error(transparent)]
    Tsm(#[from] TsmError),
    #[error(transparent)]
    Audio(#[from] AudioError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderSettings {
    pub output_bit_depth: BitDepth,
    pub donor_gain: f64,
    pub base_gain: f64,
    pub normalize_peak_dbfs: f64,
}

impl Default for RenderSettings {
    fn default() -> Self {
        RenderSettings { output_bit_depth: BitDepth::Pcm16, donor_gain: 1.0, base_gain: 1.0, normalize_peak_dbfs: -1.0 }
    }
}

impl RenderSettings {
    pub fn validate(&self) -> Result<(), RenderError> {
        for (name, g) in [("donor_gain", self.donor_gain), ("base_gain", self.base_gain)] {
            if !(g >= 0.0) || !g.is_finite() {
                return Err(RenderError::InvalidSettings(format!("{name} must be a finite value >= 0, got {g}")));
            }
        }
        if !self.normalize_peak_dbfs.is_finite() {
            return Err(RenderError::InvalidSettings("normalize_peak_dbfs must be finite".into()));
        }
        Ok(())
    }
}

/// Mix plus what was done to it.
#[derive(Debug, Clone)]
pub struct Rendered<T> {
    pub audio: AudioBuffer<T>,
    /// Peak of the summed mix before normalisation.
    pub peak_before: f64,
    /// Uniform gain applied by peak normalisation (1 when untouched).
    pub normalization_gain: f64,
}

/// Sidecar document written next to a rendered file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderReport {
    pub plan: MashupPlan,
    pub settings: RenderSettings,
    pub sample_rate: u32,
    pub channels: usize,
    pub frames: usize,
    pub peak_before: f64,
    pub normalization_gain: f64,
    pub clipped_samples: usize,
}

/// Renders the mashup.
///
/// The donor stem is resampled to the base rate, pitch-shifted once, then
/// warped and placed per pairing. The base stem passes through unchanged.
pub fn render<T: Real>(
    plan: &MashupPlan,
    base_stem: &Stem<T>,
    donor_stem: &Stem<T>,
    settings: &RenderSettings,
) -> Result<Rendered<T>, RenderError> {
    settings.validate()?;
    check_stem("base", base_stem, &plan.roles.base_song_id, plan.roles.base_role())?;
    check_stem("donor", donor_stem, &plan.roles.donor_song_id, plan.roles.donor_role)?;

    let base = &base_stem.audio;
    let sr = base.sample_rate();
    let channels = base.channel_count().max(donor_stem.audio.channel_count());
    let frames = base.len();
    let base_gain = T::lit(settings.base_gain);
    let mut mix: Vec<Vec<T>> = base
        .upmix(channels)
        .channels()
        .iter()
        .map(|c| c.iter().map(|&x| x * base_gain).collect())
        .collect();

    if settings.donor_gain > 0.0 {
        let donor_track = donor_track(plan, &donor_stem.audio, sr, frames)?.upmix(channels);
        let g = T::lit(settings.donor_gain);
        for (m, d) in mix.iter_mut().zip(donor_track.channels()) {
            for (x, &y) in m.iter_mut().zip(d) {
                *x = *x + g * y;
            }
        }
    }

    let summed = AudioBuffer::new(mix, sr)?;
    let peak_before = summed.peak().as_f64();
    let (audio, normalization_gain) = peak_normalize(&summed, settings.normalize_peak_dbfs);
    Ok(Rendered { audio, peak_before, normalization_gain })
}

fn check_stem<T: Real>(what: &'static str, stem: &Stem<T>, song: &str, role: crate::ingest::Role) -> Result<(), RenderError> {
    if stem.song_id != song || stem.role != role {
        return Err(RenderError::StemMismatch {
            what,
            expected: format!("{song}/{role}"),
            found: format!("{}/{}", stem.song_id, stem.role),
        });
    }
    Ok(())
}

/// The donor's contribution on the base timeline, `frames` long.
fn donor_track<T: Real>(
    plan: &MashupPlan,
    donor: &AudioBuffer<T>,
    sample_rate: u32,
    frames: usize,
) -> Result<AudioBuffer<T>, RenderError> {
    let donor = resample(donor, sample_rate);
    let params = TsmParams::for_rate(sample_rate);
    let shifted = pitch_shift(&donor, plan.semitone_shift, &params)?;
    let sr = sample_rate as f64;
    let half_fade = ((CROSSFADE_SECONDS / 2.0) * sr).round().max(1.0) as isize;

    let mut out = vec![vec![T::zero(); frames]; shifted.channel_count()];
    for planned in &plan.pairings {
        let Some(map) = &planned.warp else { continue };
        let warped = apply_warp(&shifted, map, &params)?;
        for p in &planned.placements {
            let base_start = (p.base_offset * sr).round() as isize;
            let len = (p.length * sr).round() as isize;
            let donor_start = (p.donor_offset * sr).round() as isize;
            for i in -half_fade..len + half_fade {
                let o = base_start + i;
                if o < 0 || o >= frames as isize {
                    continue;
                }
                let gain = T::lit(crossfade_gain(i, len, half_fade));
                let src = donor_start + i;
                if src < 0 || src >= warped.len() as isize {
                    continue;
                }
                for (dst, ch) in out.iter_mut().zip(warped.channels()) {
                    dst[o as usize] = dst[o as usize] + gain * ch[src as usize];
                }
            }
        }
    }
    Ok(AudioBuffer::new(out, sample_rate)?)
}

/// Equal-power envelope for sample `i` of a placement `len` samples long
/// whose fades extend `half` samples either side of its edges.
fn crossfade_gain(i: isize, len: isize, half: isize) -> f64 {
    let width = (2 * half) as f64;
    let quarter = std::f64::consts::FRAC_PI_2;
    let rise = ((i + half) as f64 + 0.5) / width;
    let fall = ((len + half - i) as f64 - 0.5) / width;
    let up = if rise < 1.0 { (quarter * rise).sin() } else { 1.0 };
    let down = if fall < 1.0 { (quarter * fall).sin() } else { 1.0 };
    up.min(down)
}

/// Scales so the peak equals `10^(target_dbfs/20)` if it is above that.
/// Returns the buffer and the applied gain.
pub fn peak_normalize<T: Real>(audio: &AudioBuffer<T>, target_dbfs: f64) -> (AudioBuffer<T>, f64) {
    let target = 10f64.powf(target_dbfs / 20.0);
    let peak = audio.peak().as_f64();
    if peak <= target || peak == 0.0 {
        return (audio.clone(), 1.0);
    }
    let gain = target / peak;
    (audio.scaled(T::lit(gain)), gain)
}
