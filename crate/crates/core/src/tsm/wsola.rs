use super::{TsmError, TsmParams};
use crate::audio::AudioBuffer;
use crate::Real;

pub const MIN_RATIO: f64 = 0.25;
pub const MAX_RATIO: f64 = 4.0;

/// Decimation factor of the coarse similarity search.
const COARSE_STEP: usize = 4;

/// Relative score difference below which two offsets count as tied. On
/// periodic material every period gives a near-equal peak; preferring the
/// one nearest the nominal position keeps timing close to the map.
const TIE_TOLERANCE: f64 = 1e-3;

/// Coarse local maxima within this relative distance of the best are refined.
const COARSE_SLACK: f64 = 0.05;
const MAX_REFINED_PEAKS: usize = 6;

/// Changes duration by `ratio` (output seconds per input second) without
/// changing pitch. Output length is `round(len * ratio)`.
pub fn time_stretch<T: Real>(
    audio: &AudioBuffer<T>,
    ratio: f64,
    params: &TsmParams,
) -> Result<AudioBuffer<T>, TsmError> {
    if !(MIN_RATIO..=MAX_RATIO).contains(&ratio) {
        return Err(TsmError::RatioOutOfRange(ratio));
    }
    let out_len = (audio.len() as f64 * ratio).round() as usize;
    stretch_to_len(audio, out_len, params)
}

/// Uniform stretch to exactly `out_len` samples.
pub fn stretch_to_len<T: Real>(
    audio: &AudioBuffer<T>,
    out_len: usize,
    params: &TsmParams,
) -> Result<AudioBuffer<T>, TsmError> {
    params.validate()?;
    let scale = if out_len == 0 { 1.0 } else { audio.len() as f64 / out_len as f64 };
    Ok(wsola(audio, params, out_len, |o| o * scale))
}

/// Overlap-adds Hann-windowed input frames so that the frame centred on
/// output sample `o` is taken from near input sample `source_pos(o)`.
///
/// Each frame's exact input position is chosen within `search_radius` of
/// the nominal one to best continue the previously placed frame, which
/// keeps periodic content phase-coherent across frame boundaries.
pub(crate) fn wsola<T: Real>(
    audio: &AudioBuffer<T>,
    params: &TsmParams,
    out_len: usize,
    source_pos: impl Fn(f64) -> f64,
) -> AudioBuffer<T> {
    let frame = params.frame_length;
    let hop = params.synthesis_hop;
    let window: Vec<f64> = (0..frame)
        .map(|n| 0.5 - 0.5 * (std::f64::consts::TAU * n as f64 / frame as f64).cos())
        .collect();

    let input: Vec<Vec<f64>> = audio
        .channels()
        .iter()
        .map(|c| c.iter().map(|x| x.as_f64()).collect())
        .collect();
    let search = SimilaritySearch::new(&audio.mono_mix().iter().map(|x| x.as_f64()).collect::<Vec<_>>());

    let mut acc = vec![vec![0.0f64; out_len]; input.len()];
    let mut weight = vec![0.0f64; out_len];

    // The first frame starts early enough that every output sample is
    // covered by the same number of frames.
    let lead = (frame - hop) as isize;
    let mut prev_start: Option<isize> = None;
    let mut k = 0isize;
    loop {
        let out_start = k * hop as isize - lead;
        if out_start >= out_len as isize {
            break;
        }
        let centre = out_start as f64 + frame as f64 / 2.0;
        let nominal = (source_pos(centre) - frame as f64 / 2.0).round() as isize;
        let start = match prev_start {
            None => nominal,
            Some(prev) => {
                let target = prev + hop as isize;
                nominal + search.best_offset(nominal, target, frame, params.search_radius)
            }
        };
        for n in 0..frame {
            let o = out_start + n as isize;
            if o < 0 || o >= out_len as isize {
                continue;
            }
            let o = o as usize;
            let w = window[n];
            weight[o] += w;
            let i = start + n as isize;
            if i >= 0 {
                for (ch, a) in input.iter().zip(acc.iter_mut()) {
                    if let Some(&x) = ch.get(i as usize) {
                        a[o] += w * x;
                    }
                }
            }
        }
        prev_start = Some(start);
        k += 1;
    }

    let channels = acc
        .into_iter()
        .map(|a| {
            a.iter()
                .zip(&weight)
                .map(|(&x, &w)| T::lit(if w > 1e-9 { x / w } else { 0.0 }))
                .collect()
        })
        .collect();
    AudioBuffer::new(channels, audio.sample_rate()).expect("stretching preserves buffer shape")
}

/// Normalised cross-correlation search over a mono guide signal.
struct SimilaritySearch {
    signal: Vec<f64>,
    /// Box-filtered copy used by the coarse pass so that decimation cannot
    /// step over short transients.
    smooth: Vec<f64>,
}

impl SimilaritySearch {
    fn new(mono: &[f64]) -> Self {
        let mut prefix = Vec::with_capacity(mono.len() + 1);
        prefix.push(0.0);
        for &x in mono {
            prefix.push(prefix.last().unwrap() + x);
        }
        let smooth = (0..mono.len())
            .map(|i| {
                let end = (i + COARSE_STEP).min(mono.len());
                (prefix[end] - prefix[i]) / COARSE_STEP as f64
            })
            .collect();
        SimilaritySearch { signal: mono.to_vec(), smooth }
    }

    /// Offset in `[-radius, radius]` maximising the similarity between the
    /// frame at `nominal + offset` and the frame at `target`. Near-ties keep
    /// the offset closest to zero.
    fn best_offset(&self, nominal: isize, target: isize, frame: usize, radius: usize) -> isize {
        let radius = radius as isize;
        let step = COARSE_STEP as isize;
        let grid: Vec<isize> = (-(radius / step)..=radius / step).map(|m| m * step).collect();
        let coarse: Vec<f64> =
            grid.iter().map(|&o| score(&self.smooth, nominal + o, target, frame, COARSE_STEP)).collect();
        let top = coarse.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let floor = top - COARSE_SLACK * top.abs().max(1e-12);

        // The coarse grid can miss a peak by up to half a step, so every
        // near-best local maximum is refined, not just the highest.
        let mut peaks: Vec<isize> = (0..grid.len())
            .filter(|&i| {
                let s = coarse[i];
                s >= floor && (i == 0 || s >= coarse[i - 1]) && (i + 1 == grid.len() || s >= coarse[i + 1])
            })
            .map(|i| grid[i])
            .collect();
        peaks.sort_by_key(|o| o.abs());
        peaks.truncate(MAX_REFINED_PEAKS);

        let mut best: Option<(isize, f64)> = None;
        for centre in peaks {
            for offset in (centre - step + 1).max(-radius)..=(centre + step - 1).min(radius) {
                let s = score(&self.signal, nominal + offset, target, frame, 1);
                best = Some(match best {
                    None => (offset, s),
                    Some((bo, bs)) => {
                        let tol = TIE_TOLERANCE * bs.abs().max(1e-12);
                        if s > bs + tol || (s >= bs - tol && offset.abs() < bo.abs()) {
                            (offset, s)
                        } else {
                            (bo, bs)
                        }
                    }
                });
            }
        }
        best.map_or(0, |(o, _)| o)
    }
}

/// `<cand, target> / sqrt(|cand|^2)` over one frame, sampling every `stride`.
fn score(x: &[f64], cand: isize, target: isize, frame: usize, stride: usize) -> f64 {
    let at = |i: isize| if i >= 0 { x.get(i as usize).copied().unwrap_or(0.0) } else { 0.0 };
    let mut dot = 0.0;
    let mut energy = 0.0;
    let mut n = 0;
    while n < frame {
        let c = at(cand + n as isize);
        dot += c * at(target + n as isize);
        energy += c * c;
        n += stride;
    }
    if energy > 0.0 {
        dot / energy.sqrt()
    } else {
        0.0
    }
}
