use serde::{Deserialize, Serialize};

use super::segments::{pair_segments, schedule_fill, Fill, Placement, SegmentPairing};
use super::{key_shift_semitones, AlignError, RoleAssignment};
use crate::ingest::{Key, Segment, TrackAnalysis};
use crate::tsm::{build_warp_map, WarpMap, MAX_RATIO, MAX_SEMITONES, MIN_RATIO};

/// Label given to stretches of the base timeline no analysed segment covers.
pub const GAP_LABEL: &str = "(unlabeled)";

const EPS: f64 = 1e-9;

/// User overrides applied while planning.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanOptions {
    pub allow_self: bool,
    /// Replaces the key-derived shift.
    pub semitones: Option<f64>,
    /// Replaces beat-grid warping with one uniform stretch ratio
    /// (output seconds per donor second).
    pub tempo_ratio: Option<f64>,
}

/// A pairing with everything the renderer needs to realise it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedSegment {
    #[serde(flatten)]
    pub pairing: SegmentPairing,
    /// Donor-time to base-time map; present iff the donor plays.
    pub warp: Option<WarpMap>,
    pub placements: Vec<Placement>,
}

/// Fully resolved render instructions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MashupPlan {
    pub roles: RoleAssignment,
    pub base_key: Key,
    pub donor_key: Key,
    /// Applied to the donor.
    pub semitone_shift: f64,
    pub semitones_overridden: bool,
    pub tempo_ratio_override: Option<f64>,
    pub warnings: Vec<String>,
    /// Tiles `[0, output_duration]` in timeline order.
    pub pairings: Vec<PlannedSegment>,
    pub output_duration: f64,
}

impl MashupPlan {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, AlignError> {
        serde_json::from_str(text).map_err(|e| AlignError::Document(e.to_string()))
    }

    pub fn warp_maps(&self) -> impl Iterator<Item = &WarpMap> {
        self.pairings.iter().filter_map(|p| p.warp.as_ref())
    }
}

/// Plans `donor` onto `base` under `roles`.
pub fn build_plan(
    base: &TrackAnalysis,
    donor: &TrackAnalysis,
    roles: &RoleAssignment,
    options: &PlanOptions,
) -> Result<MashupPlan, AlignError> {
    if roles.base_song_id != base.song_id {
        return Err(AlignError::SongMismatch {
            what: "base analysis",
            expected: roles.base_song_id.clone(),
            found: base.song_id.clone(),
        });
    }
    if roles.donor_song_id != donor.song_id {
        return Err(AlignError::SongMismatch {
            what: "donor analysis",
            expected: roles.donor_song_id.clone(),
            found: donor.song_id.clone(),
        });
    }
    if base.song_id == donor.song_id && !options.allow_self {
        return Err(AlignError::SelfMashup(base.song_id.clone()));
    }

    let mut warnings = Vec::new();
    let shift = key_shift_semitones(base.key, donor.key);
    if shift.mode_mismatch {
        warnings.push(format!(
            "mode mismatch: base {} vs donor {}; only the tonic is aligned",
            base.key, donor.key
        ));
    }
    let semitone_shift = match options.semitones {
        Some(s) if !s.is_finite() || s.abs() > MAX_SEMITONES => {
            return Err(AlignError::InvalidOverride(format!("semitone shift {s} outside ±{MAX_SEMITONES}")));
        }
        Some(s) => s,
        None => shift.semitones,
    };
    if let Some(r) = options.tempo_ratio {
        if !(MIN_RATIO..=MAX_RATIO).contains(&r) {
            return Err(AlignError::InvalidOverride(format!("tempo ratio {r} outside [{MIN_RATIO}, {MAX_RATIO}]")));
        }
    }

    let mut pairings = Vec::new();
    for pairing in tile_timeline(base, pair_segments(base, donor)) {
        let planned = match (&pairing.fill, &pairing.donor_segment) {
            (Fill::DonorRepeat, Some(donor_seg)) => {
                let warp = match options.tempo_ratio {
                    Some(r) => WarpMap::linear(donor_seg.start, donor_seg.end, pairing.base_segment.start, r)?,
                    None => donor_warp_map(base, donor, &pairing.base_segment, donor_seg)?,
                };
                let placements = schedule_fill(&pairing, warp.target_duration())?;
                PlannedSegment { pairing, warp: Some(warp), placements }
            }
            _ => PlannedSegment { pairing, warp: None, placements: Vec::new() },
        };
        pairings.push(planned);
    }

    Ok(MashupPlan {
        roles: roles.clone(),
        base_key: base.key,
        donor_key: donor.key,
        semitone_shift,
        semitones_overridden: options.semitones.is_some(),
        tempo_ratio_override: options.tempo_ratio,
        warnings,
        pairings,
        output_duration: base.duration,
    })
}

/// Inserts base-only pairings for uncovered parts of the base timeline.
fn tile_timeline(base: &TrackAnalysis, pairings: Vec<SegmentPairing>) -> Vec<SegmentPairing> {
    let mut out = Vec::with_capacity(pairings.len() + 2);
    let mut cursor = 0.0;
    for p in pairings {
        if p.base_segment.start > cursor + EPS {
            out.push(SegmentPairing::base_only(Segment::new(cursor, p.base_segment.start, GAP_LABEL)));
        }
        cursor = p.base_segment.end;
        out.push(p);
    }
    if base.duration > cursor + EPS {
        out.push(SegmentPairing::base_only(Segment::new(cursor, base.duration, GAP_LABEL)));
    }
    out
}

/// Warp map placing the donor segment's bars on consecutive base bars
/// starting at the base segment.
///
/// The donor's k bars map onto the first k base downbeats at or after the
/// base segment start; base bars are extrapolated at the base bar period
/// if the base runs out. Without downbeats on either side the donor is
/// stretched uniformly by the BPM ratio.
pub fn donor_warp_map(
    base: &TrackAnalysis,
    donor: &TrackAnalysis,
    base_seg: &Segment,
    donor_seg: &Segment,
) -> Result<WarpMap, AlignError> {
    let donor_bars: Vec<f64> = donor
        .downbeats
        .iter()
        .copied()
        .filter(|&d| d >= donor_seg.start - EPS && d < donor_seg.end - EPS)
        .collect();
    let base_from: Vec<f64> = base.downbeats.iter().copied().filter(|&b| b >= base_seg.start - EPS).collect();
    if donor_bars.is_empty() || base.downbeats.is_empty() {
        let ratio = donor.bpm / base.bpm;
        return Ok(WarpMap::linear(donor_seg.start, donor_seg.end, base_seg.start, ratio)?);
    }
    let k = donor_bars.len();

    // Donor bar boundaries D_0..=D_k.
    let mut donor_db = donor_bars.clone();
    let next = donor.downbeats.iter().copied().find(|&d| d > donor_bars[k - 1] + EPS);
    donor_db.push(next.unwrap_or_else(|| donor_bars[k - 1] + bar_period(donor)));

    // Base bar boundaries B_0..=B_k, extended past the end of the grid.
    let base_bar = bar_period(base);
    let mut base_db: Vec<f64> = base_from.into_iter().take(k + 1).collect();
    if base_db.is_empty() {
        let last = *base.downbeats.last().unwrap();
        let skip = ((base_seg.start - last) / base_bar).ceil().max(1.0);
        base_db.push(last + skip * base_bar);
    }
    while base_db.len() < k + 1 {
        let last = *base_db.last().unwrap();
        base_db.push(last + base_bar);
    }

    let beat = base.beat_period();
    let mut base_beats: Vec<f64> = base.beats.iter().copied().filter(|&b| b >= base_seg.start - EPS).collect();
    let mut t = base_beats.last().copied().unwrap_or(base_db[0]);
    while t < base_db[k] - EPS {
        t += beat;
        base_beats.push(t);
    }
    let donor_beats: Vec<f64> = donor
        .beats
        .iter()
        .copied()
        .filter(|&b| b >= donor_db[0] - EPS && b <= donor_db[k] + EPS)
        .collect();

    let full = build_warp_map(&donor_beats, &donor_db, &base_beats, &base_db, (base_seg.start, base_db[k]))?;
    Ok(truncate_source(&full, donor_seg.end)?)
}

/// Restricts a map to source times up to `source_end`.
fn truncate_source(map: &WarpMap, source_end: f64) -> Result<WarpMap, crate::tsm::TsmError> {
    let (_, end) = map.source_range();
    if (end - source_end).abs() <= EPS {
        return Ok(map.clone());
    }
    let mut anchors: Vec<(f64, f64)> =
        map.anchors().iter().copied().filter(|a| a.0 < source_end - EPS).collect();
    anchors.push((source_end, map.forward(source_end)));
    WarpMap::new(anchors)
}

fn bar_period(track: &TrackAnalysis) -> f64 {
    let mut gaps: Vec<f64> = track.downbeats.windows(2).map(|w| w[1] - w[0]).collect();
    if gaps.is_empty() {
        return 4.0 * track.beat_period();
    }
    gaps.sort_by(|a, b| a.total_cmp(b));
    gaps[gaps.len() / 2]
}
