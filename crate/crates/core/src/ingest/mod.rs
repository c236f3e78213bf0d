//! Parsing and validation of the external artifacts a library is built from.
//!
//! Every loader validates eagerly: a value returned from here satisfies all
//! of its type's invariants and is immutable afterwards.

mod analysis;
mod embedding;
mod filter;
mod key;
mod manifest;
mod scores;

use thiserror::Error;

pub use analysis::{load_analysis, Segment, TrackAnalysis, Violation, DOWNBEAT_TOLERANCE};
pub use embedding::{load_embeddings, parse_embeddings, EmbeddingFile, StemEmbedding};
pub use filter::{filter_library, FilterRules};
pub use key::{Key, Mode, PitchClass};
pub use manifest::{StemPaths, StemsManifest};
pub use scores::{load_cocola_scores, parse_cocola_scores, CocolaScoreSet};

use serde::{Deserialize, Serialize};

/// Functional role of a separated stem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Vocals,
    Accompaniment,
}

impl Role {
    pub fn other(self) -> Role {
        match self {
            Role::Vocals => Role::Accompaniment,
            Role::Accompaniment => Role::Vocals,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Vocals => "vocals",
            Role::Accompaniment => "accompaniment",
        }
    }
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "vocals" => Ok(Role::Vocals),
            "accompaniment" => Ok(Role::Accompaniment),
            other => Err(format!("unknown stem role {other:?} (expected vocals or accompaniment)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: parse error: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: {violation}")]
    Invalid { path: String, violation: Violation },
    #[error("{path}: model {model:?}: {song_id}/{role} has {found} dimensions, expected {expected}")]
    DimensionMismatch {
        path: String,
        model: String,
        song_id: String,
        role: Role,
        expected: usize,
        found: usize,
    },
    #[error("{path}: model {model:?}: duplicate embedding for {song_id}/{role}")]
    DuplicateEmbedding { path: String, model: String, song_id: String, role: Role },
    #[error("{path}: model {model:?}: zero-norm vector for {song_id}/{role}")]
    ZeroNorm { path: String, model: String, song_id: String, role: Role },
    #[error("{path}: duplicate directed pair ({vocal}, {accompaniment})")]
    DuplicatePair { path: String, vocal: String, accompaniment: String },
    #[error("{path}: unknown song id {song_id:?}")]
    UnknownSong { path: String, song_id: String },
}

impl IngestError {
    pub fn is_io(&self) -> bool {
        matches!(self, IngestError::Io { .. })
    }
}

pub(crate) fn read_to_string(path: &std::path::Path) -> Result<String, IngestError> {
    std::fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })
}
