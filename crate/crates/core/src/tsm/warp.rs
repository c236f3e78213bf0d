use serde::{Deserialize, Serialize};

use super::wsola::wsola;
use super::{TsmError, TsmParams};
use crate::audio::AudioBuffer;
use crate::Real;

/// Piecewise-linear mapping from donor (source) time to base (target) time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpMap {
    anchors: Vec<(f64, f64)>,
}

impl WarpMap {
    /// Anchors must be at least two, strictly increasing in both coordinates.
    pub fn new(anchors: Vec<(f64, f64)>) -> Result<Self, TsmError> {
        let increasing = anchors.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 > w[0].1);
        let finite = anchors.iter().all(|(s, t)| s.is_finite() && t.is_finite());
        if anchors.len() < 2 || !increasing || !finite {
            return Err(TsmError::InvalidWarpMap);
        }
        Ok(WarpMap { anchors })
    }

    pub fn identity(start: f64, end: f64) -> Result<Self, TsmError> {
        Self::new(vec![(start, start), (end, end)])
    }

    /// Uniform stretch of `[source_start, source_end]` onto a target span
    /// starting at `target_start`.
    pub fn linear(source_start: f64, source_end: f64, target_start: f64, ratio: f64) -> Result<Self, TsmError> {
        let target_end = target_start + (source_end - source_start) * ratio;
        Self::new(vec![(source_start, target_start), (source_end, target_end)])
    }

    pub fn anchors(&self) -> &[(f64, f64)] {
        &self.anchors
    }

    pub fn source_range(&self) -> (f64, f64) {
        (self.anchors[0].0, self.anchors[self.anchors.len() - 1].0)
    }

    pub fn target_range(&self) -> (f64, f64) {
        (self.anchors[0].1, self.anchors[self.anchors.len() - 1].1)
    }

    pub fn target_duration(&self) -> f64 {
        let (a, b) = self.target_range();
        b - a
    }

    pub fn is_identity(&self) -> bool {
        self.anchors.iter().all(|(s, t)| s == t)
    }

    /// Target time of source time `s`, extrapolating with the edge slopes.
    pub fn forward(&self, s: f64) -> f64 {
        interpolate(&self.anchors, s, |a| a.0, |a| a.1)
    }

    /// Source time of target time `t`, extrapolating with the edge slopes.
    pub fn inverse(&self, t: f64) -> f64 {
        interpolate(&self.anchors, t, |a| a.1, |a| a.0)
    }

    /// Output seconds per input second on each anchor interval.
    pub fn interval_ratios(&self) -> Vec<f64> {
        self.anchors
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect()
    }
}

fn interpolate(
    anchors: &[(f64, f64)],
    x: f64,
    from: impl Fn(&(f64, f64)) -> f64,
    to: impl Fn(&(f64, f64)) -> f64,
) -> f64 {
    let i = anchors.partition_point(|a| from(a) <= x);
    let seg = i.clamp(1, anchors.len() - 1);
    let (a, b) = (&anchors[seg - 1], &anchors[seg]);
    to(a) + (x - from(a)) * (to(b) - to(a)) / (from(b) - from(a))
}

/// Pairs a donor beat grid with a base beat grid over `region` (base time).
///
/// The k-th donor downbeat is anchored to the k-th base downbeat inside the
/// region. Within a bar, beats are paired in order when both sides have the
/// same number of them; otherwise the bar is stretched linearly between its
/// downbeats. Beats after the last paired downbeat are paired in order. The
/// region start and end are anchored by extrapolating the neighbouring
/// interval's ratio.
///
/// Donor grids are used as given; the caller restricts them to the donor
/// material being placed.
pub fn build_warp_map(
    donor_beats: &[f64],
    donor_downbeats: &[f64],
    base_beats: &[f64],
    base_downbeats: &[f64],
    region: (f64, f64),
) -> Result<WarpMap, TsmError> {
    let (start, end) = region;
    if !(end > start) {
        return Err(TsmError::ZeroLengthRegion);
    }
    const EPS: f64 = 1e-9;
    let in_region = |t: &&f64| **t >= start - EPS && **t <= end + EPS;
    let base_db: Vec<f64> = base_downbeats.iter().filter(in_region).copied().collect();
    let base_b: Vec<f64> = base_beats.iter().filter(in_region).copied().collect();
    if donor_downbeats.is_empty() {
        return Err(TsmError::EmptyGrid("donor has no downbeats"));
    }
    if base_db.is_empty() {
        return Err(TsmError::EmptyGrid("base has no downbeats in the region"));
    }

    let bars = donor_downbeats.len().min(base_db.len());
    let strictly_between = |xs: &[f64], lo: f64, hi: f64| -> Vec<f64> {
        xs.iter().copied().filter(|&x| x > lo + EPS && x < hi - EPS).collect()
    };

    let mut anchors = Vec::new();
    for k in 0..bars {
        anchors.push((donor_downbeats[k], base_db[k]));
        let (d_lo, b_lo) = (donor_downbeats[k], base_db[k]);
        if k + 1 < bars {
            let d_in = strictly_between(donor_beats, d_lo, donor_downbeats[k + 1]);
            let b_in = strictly_between(base_b.as_slice(), b_lo, base_db[k + 1]);
            if d_in.len() == b_in.len() {
                anchors.extend(d_in.into_iter().zip(b_in));
            }
        } else {
            let d_hi = donor_downbeats.get(bars).copied().unwrap_or(f64::INFINITY);
            let b_hi = base_db.get(bars).copied().unwrap_or(end + 2.0 * EPS);
            let d_in = strictly_between(donor_beats, d_lo, d_hi);
            let b_in = strictly_between(base_b.as_slice(), b_lo, b_hi);
            anchors.extend(d_in.into_iter().zip(b_in));
        }
    }

    let fallback = fallback_slope(donor_beats, &base_b);
    let slope_at = |a: &(f64, f64), b: &(f64, f64)| (b.0 - a.0) / (b.1 - a.1);

    let first = anchors[0];
    if start < first.1 - EPS {
        let slope = if anchors.len() >= 2 { slope_at(&anchors[0], &anchors[1]) } else { fallback };
        anchors.insert(0, (first.0 - (first.1 - start) * slope, start));
    }
    let last = *anchors.last().unwrap();
    if end > last.1 + EPS {
        let n = anchors.len();
        let slope = if n >= 2 { slope_at(&anchors[n - 2], &anchors[n - 1]) } else { fallback };
        anchors.push((last.0 + (end - last.1) * slope, end));
    }

    let mut clean: Vec<(f64, f64)> = Vec::with_capacity(anchors.len());
    for a in anchors {
        match clean.last() {
            Some(p) if a.0 <= p.0 || a.1 <= p.1 => {}
            _ => clean.push(a),
        }
    }
    WarpMap::new(clean)
}

/// Donor seconds per base second from median beat periods.
fn fallback_slope(donor_beats: &[f64], base_beats: &[f64]) -> f64 {
    fn median_period(beats: &[f64]) -> Option<f64> {
        let mut gaps: Vec<f64> = beats.windows(2).map(|w| w[1] - w[0]).collect();
        if gaps.is_empty() {
            return None;
        }
        gaps.sort_by(|a, b| a.total_cmp(b));
        Some(gaps[gaps.len() / 2])
    }
    match (median_period(donor_beats), median_period(base_beats)) {
        (Some(d), Some(b)) => d / b,
        _ => 1.0,
    }
}

/// Renders `audio` through `map`. Output sample 0 corresponds to the map's
/// first target time, so the source at anchor time `s` lands at
/// `t - target_start`; output length covers the map's target span.
pub fn apply_warp<T: Real>(
    audio: &AudioBuffer<T>,
    map: &WarpMap,
    params: &TsmParams,
) -> Result<AudioBuffer<T>, TsmError> {
    params.validate()?;
    let (s0, s1) = map.source_range();
    let duration = audio.duration();
    if s1 <= 0.0 || s0 >= duration {
        return Err(TsmError::MapAudioMismatch { start: s0, end: s1, duration });
    }
    let sr = audio.sample_rate() as f64;
    let (t0, t1) = map.target_range();
    let out_len = ((t1 - t0) * sr).round() as usize;
    Ok(wsola(audio, params, out_len, |o| map.inverse(t0 + o / sr) * sr))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(bpm: f64, bars: usize, offset: f64) -> (Vec<f64>, Vec<f64>) {
        let period = 60.0 / bpm;
        let beats: Vec<f64> = (0..bars * 4).map(|i| offset + i as f64 * period).collect();
        let downbeats = beats.iter().step_by(4).copied().collect();
        (beats, downbeats)
    }

    #[test]
    fn identical_grids_give_identity() {
        let (b, d) = grid(120.0, 4, 0.0);
        let map = build_warp_map(&b, &d, &b, &d, (0.0, 8.0)).unwrap();
        assert!(map.is_identity(), "{:?}", map.anchors());
        assert_eq!(map.anchors().len(), 17);
    }

    #[test]
    fn tempo_change_ratio() {
        let (db, dd) = grid(100.0, 1, 0.0);
        let (bb, bd) = grid(120.0, 1, 0.0);
        let map = build_warp_map(&db, &dd, &bb, &bd, (0.0, 2.0)).unwrap();
        for r in map.interval_ratios() {
            assert!((r - 0.5 / 0.6).abs() < 1e-12, "{r}");
        }
        assert_eq!(map.target_range(), (0.0, 2.0));
        assert!((map.source_range().1 - 2.4).abs() < 1e-12);
    }

    #[test]
    fn uneven_bars_get_per_interval_ratios() {
        let donor_beats = [0.0, 0.5, 1.0, 1.5, 2.0];
        let base_beats = [0.0, 0.4, 1.0, 1.7, 2.0];
        let map = build_warp_map(&donor_beats, &[0.0, 2.0], &base_beats, &[0.0, 2.0], (0.0, 2.0)).unwrap();
        let ratios = map.interval_ratios();
        assert_eq!(ratios.len(), 4);
        let expect = [0.8, 1.2, 1.4, 0.6];
        for (r, e) in ratios.iter().zip(expect) {
            assert!((r - e).abs() < 1e-12);
        }
        assert!(map.anchors().contains(&(2.0, 2.0)));
    }

    #[test]
    fn mismatched_beat_counts_fall_back_to_linear() {
        let donor_beats = [0.0, 0.5, 1.0, 1.5, 2.0];
        let base_beats = [0.0, 1.0, 2.0];
        let map = build_warp_map(&donor_beats, &[0.0, 2.0], &base_beats, &[0.0, 2.0], (0.0, 2.0)).unwrap();
        assert_eq!(map.anchors(), &[(0.0, 0.0), (2.0, 2.0)]);
    }

    #[test]
    fn region_edges_extrapolate() {
        let (db, dd) = grid(100.0, 2, 1.0);
        let (bb, bd) = grid(120.0, 2, 10.0);
        let map = build_warp_map(&db, &dd, &bb, &bd, (9.5, 14.0)).unwrap();
        assert_eq!(map.target_range(), (9.5, 14.0));
        assert!((map.forward(1.0) - 10.0).abs() < 1e-12);
        assert!((map.inverse(9.5) - (1.0 - 0.6)).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert_eq!(build_warp_map(&[], &[], &[0.0], &[0.0], (0.0, 1.0)).unwrap_err(), TsmError::EmptyGrid("donor has no downbeats"));
        assert!(matches!(build_warp_map(&[0.0], &[0.0], &[5.0], &[5.0], (0.0, 1.0)), Err(TsmError::EmptyGrid(_))));
        assert_eq!(build_warp_map(&[0.0], &[0.0], &[0.0], &[0.0], (1.0, 1.0)).unwrap_err(), TsmError::ZeroLengthRegion);
        assert!(WarpMap::new(vec![(0.0, 0.0)]).is_err());
        assert!(WarpMap::new(vec![(0.0, 0.0), (1.0, 0.0)]).is_err());
    }

    #[test]
    fn forward_inverse_agree() {
        let map = WarpMap::new(vec![(0.0, 1.0), (1.0, 1.5), (3.0, 4.0)]).unwrap();
        for s in [-1.0, 0.0, 0.3, 1.0, 2.2, 3.0, 5.0] {
            assert!((map.inverse(map.forward(s)) - s).abs() < 1e-12);
        }
    }

    #[test]
    fn map_outside_audio_is_rejected() {
        let audio = AudioBuffer::<f32>::silence(1, 8000, 8000).unwrap();
        let map = WarpMap::linear(5.0, 6.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            apply_warp(&audio, &map, &TsmParams::for_rate(8000)),
            Err(TsmError::MapAudioMismatch { .. })
        ));
    }

    #[test]
    fn two_anchor_map_lengthens() {
        let audio = AudioBuffer::<f32>::mono((0..8000).map(|i| (i as f32 * 0.05).sin()).collect(), 8000).unwrap();
        let map = WarpMap::new(vec![(0.0, 0.0), (1.0, 1.2)]).unwrap();
        let out = apply_warp(&audio, &map, &TsmParams::for_rate(8000)).unwrap();
        assert!((out.duration() - 1.2).abs() <= 0.02);
    }

    // Grid with per-beat jitter; `meter` beats per bar.
    fn jittered(period: f64, bars: usize, meter: usize, jitter: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let beats: Vec<f64> = (0..bars * meter)
            .map(|i| i as f64 * period + jitter[i % jitter.len()] * period * 0.2)
            .collect();
        let downbeats = beats.iter().step_by(meter).copied().collect();
        (beats, downbeats)
    }

    proptest::proptest! {
        #[test]
        fn downbeats_land_exactly_and_map_inverts(
            donor_bpm in 70.0f64..180.0,
            base_bpm in 70.0f64..180.0,
            donor_bars in 1usize..8,
            base_bars in 1usize..8,
            donor_meter in 3usize..5,
            jitter in proptest::collection::vec(-1.0f64..1.0, 1..6),
        ) {
            let (db, dd) = jittered(60.0 / donor_bpm, donor_bars, donor_meter, &jitter);
            let (bb, bd) = jittered(60.0 / base_bpm, base_bars, 4, &jitter);
            let end = bb.last().unwrap() + 60.0 / base_bpm;
            let map = build_warp_map(&db, &dd, &bb, &bd, (bd[0], end)).unwrap();
            for k in 0..donor_bars.min(base_bars) {
                proptest::prop_assert!((map.forward(dd[k]) - bd[k]).abs() < 1e-9);
            }
            proptest::prop_assert!(map.interval_ratios().iter().all(|r| *r > 0.0));
            let (lo, hi) = map.target_range();
            for i in 0..=20 {
                let t = lo + (hi - lo) * i as f64 / 20.0;
                proptest::prop_assert!((map.forward(map.inverse(t)) - t).abs() < 1e-9);
            }
        }
    }
}
