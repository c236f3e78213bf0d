//! Band-limited resampling with a Kaiser-windowed sinc kernel.

use std::sync::OnceLock;

use super::AudioBuffer;
use crate::Real;

/// Zero crossings on each side of the kernel at unity cutoff (64 taps).
pub const SINC_ZERO_CROSSINGS: usize = 32;
pub const KAISER_BETA: f64 = 8.6;
/// Kernel table resolution, entries per zero crossing.
const OVERSAMPLE: usize = 512;
/// Cutoff relative to the lower of the two Nyquist frequencies.
const ROLLOFF: f64 = 0.94;

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let half = x / 2.0;
    for k in 1..64 {
        term *= (half / k as f64) * (half / k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// `sinc(u) * kaiser(u / Z)` sampled at `u = i / OVERSAMPLE`.
fn kernel_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = SINC_ZERO_CROSSINGS * OVERSAMPLE;
        let norm = bessel_i0(KAISER_BETA);
        (0..=n + 1)
            .map(|i| {
                let u = i as f64 / OVERSAMPLE as f64;
                let x = u / SINC_ZERO_CROSSINGS as f64;
                if x >= 1.0 {
                    return 0.0;
                }
                let sinc = if i == 0 {
                    1.0
                } else {
                    let p = std::f64::consts::PI * u;
                    p.sin() / p
                };
                sinc * bessel_i0(KAISER_BETA * (1.0 - x * x).sqrt()) / norm
            })
            .collect()
    })
}

#[inline]
fn kernel(u: f64) -> f64 {
    let table = kernel_table();
    let pos = u.abs() * OVERSAMPLE as f64;
    let i = pos as usize;
    if i + 1 >= table.len() {
        return 0.0;
    }
    let frac = pos - i as f64;
    table[i] + (table[i + 1] - table[i]) * frac
}

/// Resamples one channel so that output sample `j` sits at input position
/// `j / ratio`, producing exactly `out_len` samples. `ratio` is output rate
/// over input rate.
pub fn resample_channel<T: Real>(input: &[T], ratio: f64, out_len: usize) -> Vec<T> {
    assert!(ratio > 0.0, "resample ratio must be positive");
    let cutoff = ratio.min(1.0) * ROLLOFF;
    let half_width = SINC_ZERO_CROSSINGS as f64 / cutoff;
    let n = input.len() as isize;
    let step = 1.0 / ratio;
    (0..out_len)
        .map(|j| {
            let center = j as f64 * step;
            let lo = (center - half_width).ceil() as isize;
            let hi = (center + half_width).floor() as isize;
            let mut acc = 0.0;
            let mut weight = 0.0;
            for k in lo..=hi {
                let h = kernel((center - k as f64) * cutoff);
                weight += h;
                if (0..n).contains(&k) {
                    acc += input[k as usize].as_f64() * h;
                }
            }
            T::lit(if weight != 0.0 { acc / weight } else { 0.0 })
        })
        .collect()
}

/// Converts `buffer` to `target_rate`. Output length is
/// `round(len * target_rate / source_rate)`.
pub fn resample<T: Real>(buffer: &AudioBuffer<T>, target_rate: u32) -> AudioBuffer<T> {
    assert!(target_rate > 0, "target rate must be positive");
    let source_rate = buffer.sample_rate();
    if source_rate == target_rate {
        return buffer.clone();
    }
    let ratio = target_rate as f64 / source_rate as f64;
    let out_len = (buffer.len() as f64 * ratio).round() as usize;
    let channels = buffer
        .channels()
        .iter()
        .map(|c| resample_channel(c, ratio, out_len))
        .collect();
    AudioBuffer::new(channels, target_rate).expect("resampling preserves buffer shape")
}

/// Stretches the signal to exactly `out_len` samples at an unchanged sample
/// rate, which transposes pitch by `len / out_len`.
pub fn resample_to_len<T: Real>(buffer: &AudioBuffer<T>, out_len: usize) -> AudioBuffer<T> {
    if out_len == buffer.len() {
        return buffer.clone();
    }
    let ratio = out_len as f64 / buffer.len().max(1) as f64;
    buffer.map_channels(|c| resample_channel(c, ratio, out_len))
}
