use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_to_string, IngestError, Key};

/// Maximum distance, in seconds, between a downbeat and the beat it sits on.
pub const DOWNBEAT_TOLERANCE: f64 = 0.030;

/// Slack allowed when comparing segment boundaries to the track duration.
const BOUNDARY_EPS: f64 = 1e-9;

/// A labelled section of a song ("verse", "chorus", ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub label: String,
}

impl Segment {
    pub fn new(start: f64, end: f64, label: impl Into<String>) -> Self {
        Segment { start, end, label: label.into() }
    }

    pub fn duration(&self) -> f64 {
        self.end - self.start
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t < self.end
    }
}

/// Invariant broken by a track analysis.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyId,
    BpmNotPositive(f64),
    DurationNotPositive(f64),
    NonFiniteTime,
    BeatsNotIncreasing { index: usize },
    DownbeatsNotIncreasing { index: usize },
    DownbeatOffGrid { time: f64 },
    SegmentEndBeforeStart { index: usize },
    SegmentNegativeStart { index: usize },
    SegmentEmptyLabel { index: usize },
    SegmentsOverlap { index: usize },
    SegmentBeyondDuration { index: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyId => write!(f, "song id is empty"),
            Violation::BpmNotPositive(b) => write!(f, "bpm not positive ({b})"),
            Violation::DurationNotPositive(d) => write!(f, "duration not positive ({d})"),
            Violation::NonFiniteTime => write!(f, "non-finite time value"),
            Violation::BeatsNotIncreasing { index } => {
                write!(f, "beats not increasing (at index {index})")
            }
            Violation::DownbeatsNotIncreasing { index } => {
                write!(f, "downbeats not increasing (at index {index})")
            }
            Violation::DownbeatOffGrid { time } => write!(
                f,
                "downbeat at {time} s is not within {} ms of any beat",
                DOWNBEAT_TOLERANCE * 1e3
            ),
            Violation::SegmentEndBeforeStart { index } => {
                write!(f, "segment end before start (segment {index})")
            }
            Violation::SegmentNegativeStart { index } => {
                write!(f, "segment start is negative (segment {index})")
            }
            Violation::SegmentEmptyLabel { index } => {
                write!(f, "segment label is empty (segment {index})")
            }
            Violation::SegmentsOverlap { index } => {
                write!(f, "segments overlap or are unsorted (segment {index})")
            }
            Violation::SegmentBeyondDuration { index } => {
                write!(f, "segment ends after track duration (segment {index})")
            }
        }
    }
}

/// Musical metadata for one song, as produced by an external analyzer.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackAnalysis {
    pub song_id: String,
    pub bpm: f64,
    pub beats: Vec<f64>,
    pub downbeats: Vec<f64>,
    pub key: Key,
    pub duration: f64,
    pub segments: Vec<Segment>,
}

/// On-disk layout of an analysis file.
#[derive(Debug, Serialize, Deserialize)]
struct AnalysisDoc {
    id: String,
    bpm: f64,
    beats: Vec<f64>,
    downbeats: Vec<f64>,
    duration: f64,
    key: Key,
    segments: Vec<Segment>,
}

impl TrackAnalysis {
    /// Checks every invariant, returning the first one that fails.
    pub fn validate(&self) -> Result<(), Violation> {
        if self.song_id.is_empty() {
            return Err(Violation::EmptyId);
        }
        if !(self.bpm > 0.0) || !self.bpm.is_finite() {
            return Err(Violation::BpmNotPositive(self.bpm));
        }
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(Violation::DurationNotPositive(self.duration));
        }
        let all_times = self
            .beats
            .iter()
            .chain(&self.downbeats)
            .chain(self.segments.iter().flat_map(|s| [&s.start, &s.end]));
        if all_times.into_iter().any(|t| !t.is_finite()) {
            return Err(Violation::NonFiniteTime);
        }
        if let Some(i) = first_non_increasing(&self.beats) {
            return Err(Violation::BeatsNotIncreasing { index: i });
        }
        if let Some(i) = first_non_increasing(&self.downbeats) {
            return Err(Violation::DownbeatsNotIncreasing { index: i });
        }
        for &d in &self.downbeats {
            if nearest_distance(&self.beats, d) > DOWNBEAT_TOLERANCE {
                return Err(Violation::DownbeatOffGrid { time: d });
            }
        }
        for (index, seg) in self.segments.iter().enumerate() {
            if seg.start < 0.0 {
                return Err(Violation::SegmentNegativeStart { index });
            }
            if seg.end <= seg.start {
                return Err(Violation::SegmentEndBeforeStart { index });
            }
            if seg.label.trim().is_empty() {
                return Err(Violation::SegmentEmptyLabel { index });
            }
            if seg.end > self.duration + BOUNDARY_EPS {
                return Err(Violation::SegmentBeyondDuration { index });
            }
            if index > 0 && seg.start < self.segments[index - 1].end {
                return Err(Violation::SegmentsOverlap { index });
            }
        }
        Ok(())
    }

    pub fn from_json_str(text: &str, origin: &str) -> Result<Self, IngestError> {
        let doc: AnalysisDoc = serde_json::from_str(text).map_err(|e| IngestError::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })?;
        let track = TrackAnalysis {
            song_id: doc.id,
            bpm: doc.bpm,
            beats: doc.beats,
            downbeats: doc.downbeats,
            key: doc.key,
            duration: doc.duration,
            segments: doc.segments,
        };
        track.validate().map_err(|violation| IngestError::Invalid {
            path: origin.to_string(),
            violation,
        })?;
        Ok(track)
    }

    pub fn to_json_string(&self) -> String {
        let doc = AnalysisDoc {
            id: self.song_id.clone(),
            bpm: self.bpm,
            beats: self.beats.clone(),
            downbeats: self.downbeats.clone(),
            duration: self.duration,
            key: self.key,
            segments: self.segments.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("analysis serializes")
    }

    pub fn save(&self, path: &Path) -> Result<(), IngestError> {
        std::fs::write(path, self.to_json_string()).map_err(|source| IngestError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    /// Seconds per beat implied by the annotated tempo.
    pub fn beat_period(&self) -> f64 {
        60.0 / self.bpm
    }
}

/// Reads and validates one analysis file.
pub fn load_analysis(path: &Path) -> Result<TrackAnalysis, IngestError> {
    let text = read_to_string(path)?;
    TrackAnalysis::from_json_str(&text, &path.display().to_string())
}

fn first_non_increasing(xs: &[f64]) -> Option<usize> {
    xs.windows(2).position(|w| w[1] <= w[0]).map(|i| i + 1)
}

/// Distance from `t` to the closest element of a sorted slice.
fn nearest_distance(sorted: &[f64], t: f64) -> f64 {
    let i = sorted.partition_point(|&x| x < t);
    let mut best = f64::INFINITY;
    if i < sorted.len() {
        best = best.min((sorted[i] - t).abs());
    }
    if i > 0 {
        best = best.min((t - sorted[i - 1]).abs());
    }
    best
}
