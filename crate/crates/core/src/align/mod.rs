//! Planning a mashup: key shift, segment pairing, repetition fill and
//! beat-grid warp maps, resolved against the base song's timeline.

mod plan;
mod segments;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{Key, Role};
use crate::tsm::TsmError;

pub use plan::{build_plan, donor_warp_map, MashupPlan, PlanOptions, PlannedSegment};
pub use segments::{pair_segments, schedule_fill, Fill, Placement, SegmentPairing};

#[derive(Debug, Error, PartialEq)]
pub enum AlignError {
    #[error("base and donor are both {0:?}; pass the self-mashup override to allow this")]
    SelfMashup(String),
    #[error("{what} is {found:?} but the role assignment names {expected:?}")]
    SongMismatch { what: &'static str, expected: String, found: String },
    #[error("segment pairing has no donor segment to repeat")]
    NotDonorFilled,
    #[error("donor segment has zero warped length")]
    ZeroLengthDonor,
    #[error("invalid override: {0}")]
    InvalidOverride(String),
    #[error("plan document: {0}")]
    Document(String),
    #[error(transparent)]
    Warp(#[from] TsmError),
}

/// Which song is the base, which is the donor, and what the donor supplies.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RoleAssignment {
    pub base_song_id: String,
    pub donor_song_id: String,
    pub donor_role: Role,
}

impl RoleAssignment {
    pub fn new(
        base: impl Into<String>,
        donor: impl Into<String>,
        donor_role: Role,
        allow_self: bool,
    ) -> Result<Self, AlignError> {
        let (base_song_id, donor_song_id) = (base.into(), donor.into());
        if base_song_id == donor_song_id && !allow_self {
            return Err(AlignError::SelfMashup(base_song_id));
        }
        Ok(RoleAssignment { base_song_id, donor_song_id, donor_role })
    }

    /// Role the base song contributes.
    pub fn base_role(&self) -> Role {
        self.donor_role.other()
    }
}

/// Transposition moving the donor's tonic onto the base tonic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyShift {
    /// In `[-6, 5]`; the tritone resolves downward.
    pub semitones: f64,
    /// Modes differ; only the tonic was aligned.
    pub mode_mismatch: bool,
}

pub fn key_shift_semitones(base: Key, donor: Key) -> KeyShift {
    let diff = base.tonic.value() as i32 - donor.tonic.value() as i32;
    let semitones = (diff + 6).rem_euclid(12) - 6;
    KeyShift { semitones: semitones as f64, mode_mismatch: base.mode != donor.mode }
}
