use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::AlignError;
use crate::ingest::{Segment, TrackAnalysis};

/// Remaining span, in seconds, below which no further placement is emitted.
const FILL_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fill {
    /// Donor segment looped to cover the base segment.
    DonorRepeat,
    /// Only the base plays.
    BaseOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentPairing {
    pub base_segment: Segment,
    pub donor_segment: Option<Segment>,
    pub fill: Fill,
}

impl SegmentPairing {
    pub fn base_only(base_segment: Segment) -> Self {
        SegmentPairing { base_segment, donor_segment: None, fill: Fill::BaseOnly }
    }

    pub fn with_donor(base_segment: Segment, donor_segment: Segment) -> Self {
        SegmentPairing { base_segment, donor_segment: Some(donor_segment), fill: Fill::DonorRepeat }
    }
}

/// One copy of warped donor material placed on the base timeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    /// Seconds into the warped donor segment.
    pub donor_offset: f64,
    /// Absolute base-song time.
    pub base_offset: f64,
    pub length: f64,
}

/// Pairs each base segment with a donor segment of the same label: the
/// occurrence with the same ordinal if there is one, else the first.
pub fn pair_segments(base: &TrackAnalysis, donor: &TrackAnalysis) -> Vec<SegmentPairing> {
    let mut donor_by_label: HashMap<&str, Vec<&Segment>> = HashMap::new();
    for seg in &donor.segments {
        donor_by_label.entry(seg.label.as_str()).or_default().push(seg);
    }
    let mut ordinal: HashMap<&str, usize> = HashMap::new();
    base.segments
        .iter()
        .map(|seg| {
            let n = ordinal.entry(seg.label.as_str()).or_insert(0);
            let pick = donor_by_label
                .get(seg.label.as_str())
                .and_then(|occ| occ.get(*n).or(occ.first()));
            *n += 1;
            match pick {
                Some(d) => SegmentPairing::with_donor(seg.clone(), (*d).clone()),
                None => SegmentPairing::base_only(seg.clone()),
            }
        })
        .collect()
}

/// Loops the warped donor segment from its start until the base segment is
/// covered; the last copy is truncated.
pub fn schedule_fill(pairing: &SegmentPairing, donor_warped_duration: f64) -> Result<Vec<Placement>, AlignError> {
    if pairing.fill != Fill::DonorRepeat || pairing.donor_segment.is_none() {
        return Err(AlignError::NotDonorFilled);
    }
    if !(donor_warped_duration > 0.0) {
        return Err(AlignError::ZeroLengthDonor);
    }
    let span = pairing.base_segment.duration();
    let mut placements = Vec::new();
    let mut covered = 0.0;
    while span - covered > FILL_EPS {
        let length = donor_warped_duration.min(span - covered);
        placements.push(Placement {
            donor_offset: 0.0,
            base_offset: pairing.base_segment.start + covered,
            length,
        });
        covered += length;
    }
    Ok(placements)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Key;

    fn track(id: &str, labels: &[&str]) -> TrackAnalysis {
        let segments = labels
            .iter()
            .enumerate()
            .map(|(i, l)| Segment::new(i as f64 * 10.0, (i + 1) as f64 * 10.0, *l))
            .collect();
        TrackAnalysis {
            song_id: id.into(),
            bpm: 120.0,
            beats: vec![0.0],
            downbeats: vec![0.0],
            key: Key::major(0),
            duration: labels.len() as f64 * 10.0,
            segments,
        }
    }

    fn span(len: f64) -> SegmentPairing {
        SegmentPairing::with_donor(Segment::new(100.0, 100.0 + len, "v"), Segment::new(0.0, 8.0, "v"))
    }

    #[test]
    fn matching_structures_pair_by_ordinal() {
        let p = pair_segments(&track("b", &["verse", "chorus"]), &track("d", &["verse", "chorus"]));
        assert_eq!(p.len(), 2);
        assert!(p.iter().all(|x| x.fill == Fill::DonorRepeat));
        assert_eq!(p[1].donor_segment.as_ref().unwrap().start, 10.0);
    }

    #[test]
    fn missing_label_is_base_only() {
        let p = pair_segments(&track("b", &["verse", "bridge"]), &track("d", &["verse", "chorus"]));
        assert_eq!(p[1].fill, Fill::BaseOnly);
        assert!(p[1].donor_segment.is_none());
    }

    #[test]
    fn extra_occurrence_falls_back_to_first() {
        let p = pair_segments(&track("b", &["verse", "verse"]), &track("d", &["intro", "verse"]));
        assert_eq!(p[0].donor_segment, p[1].donor_segment);
        let second = pair_segments(&track("b", &["verse", "verse"]), &track("d", &["verse", "verse"]));
        assert_eq!(second[1].donor_segment.as_ref().unwrap().start, 10.0);
    }

    #[test]
    fn fill_examples() {
        let lengths = |len| schedule_fill(&span(len), 8.0).unwrap().iter().map(|p| p.length).collect::<Vec<_>>();
        assert_eq!(lengths(20.0), vec![8.0, 8.0, 4.0]);
        assert_eq!(lengths(8.0), vec![8.0]);
        assert_eq!(lengths(7.0), vec![7.0]);
        let offsets: Vec<_> = schedule_fill(&span(20.0), 8.0).unwrap().iter().map(|p| p.base_offset).collect();
        assert_eq!(offsets, vec![100.0, 108.0, 116.0]);
    }

    #[test]
    fn fill_errors() {
        assert_eq!(schedule_fill(&span(5.0), 0.0).unwrap_err(), AlignError::ZeroLengthDonor);
        let base_only = SegmentPairing::base_only(Segment::new(0.0, 1.0, "x"));
        assert_eq!(schedule_fill(&base_only, 1.0).unwrap_err(), AlignError::NotDonorFilled);
    }

    proptest::proptest! {
        #[test]
        fn placements_tile_the_span(len in 0.01f64..300.0, donor in 0.05f64..50.0) {
            let placements = schedule_fill(&span(len), donor).unwrap();
            let mut cursor = 100.0;
            for p in &placements {
                proptest::prop_assert!((p.base_offset - cursor).abs() < 1e-9);
                proptest::prop_assert!(p.length <= donor && p.donor_offset == 0.0);
                cursor += p.length;
            }
            proptest::prop_assert!((cursor - (100.0 + len)).abs() < 1e-9);
        }
    }

    proptest::proptest! {
        #[test]
        fn one_pairing_per_base_segment(
            base in proptest::collection::vec(0usize..4, 1..10),
            donor in proptest::collection::vec(0usize..4, 1..10),
        ) {
            let names = ["intro", "verse", "chorus", "bridge"];
            let labels = |xs: &[usize]| xs.iter().map(|&i| names[i]).collect::<Vec<_>>();
            let (b, d) = (track("b", &labels(&base)), track("d", &labels(&donor)));
            let pairs = pair_segments(&b, &d);
            proptest::prop_assert_eq!(pairs.len(), b.segments.len());
            for (p, seg) in pairs.iter().zip(&b.segments) {
                proptest::prop_assert_eq!(&p.base_segment, seg);
                match &p.donor_segment {
                    Some(ds) => proptest::prop_assert_eq!(&ds.label, &seg.label),
                    None => proptest::prop_assert!(!d.segments.iter().any(|s| s.label == seg.label)),
                }
            }
        }
    }
}
