use serde::{Deserialize, Serialize};

use super::{Mode, PitchClass, TrackAnalysis};

/// Library selection rules on key and duration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterRules {
    /// Tonics a track may have.
    pub tonics: Vec<PitchClass>,
    pub modes: Vec<Mode>,
    /// Inclusive duration bounds in seconds.
    pub min_duration: f64,
    pub max_duration: f64,
}

impl FilterRules {
    /// Tonics within `max_distance` semitones (circularly) of `center`.
    pub fn tonics_near(center: PitchClass, max_distance: u8) -> Vec<PitchClass> {
        PitchClass::all().filter(|pc| pc.distance(center) <= max_distance).collect()
    }

    pub fn accepts(&self, track: &TrackAnalysis) -> bool {
        self.tonics.contains(&track.key.tonic)
            && self.modes.contains(&track.key.mode)
            && track.duration >= self.min_duration
            && track.duration <= self.max_duration
    }
}

impl Default for FilterRules {
    /// Major keys from B♭ to D and durations of 184–194 s.
    fn default() -> Self {
        FilterRules {
            tonics: Self::tonics_near(PitchClass::C, 2),
            modes: vec![Mode::Major],
            min_duration: 184.0,
            max_duration: 194.0,
        }
    }
}

/// Keeps the tracks satisfying every rule, in input order.
pub fn filter_library(tracks: &[TrackAnalysis], rules: &FilterRules) -> Vec<TrackAnalysis> {
    tracks.iter().filter(|t| rules.accepts(t)).cloned().collect()
}
