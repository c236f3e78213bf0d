//! Compatibility analysis over directed (vocals × accompaniment) scores.
//!
//! Builds similarity matrices from stem embeddings or from externally
//! computed compatibility scores, measures their asymmetry, ranks donor
//! candidates for a base song, clusters embeddings, and compares
//! partitions and score sets.

mod ari;
mod cluster;
mod correlate;
mod matrix;
mod report;

use thiserror::Error;

pub use ari::adjusted_rand_index;
pub use cluster::{agglomerative_cluster, cluster_distance_matrix, cosine_distance_matrix, Clustering, Linkage};
pub use correlate::{correlate, kendall_tau_b, pearson, rank_average, spearman, CorrelationReport};
pub use matrix::{
    asymmetry_stats, build_cocola_matrix, build_embedding_matrix, rank_candidates, AsymmetryStats,
    DirectedScoreMatrix, ScoreSource,
};
pub use report::{compat_report, ClusterSummary, CompatReport, ItemLabel};

use crate::ingest::Role;
use crate::Real;

#[derive(Debug, Error, PartialEq)]
pub enum CompatError {
    #[error("cosine similarity of a zero-norm vector")]
    ZeroNorm,
    #[error("vectors differ in dimension ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("song {song:?} has no {role} embedding for model {model:?}")]
    MissingRole { song: String, role: Role, model: String },
    #[error("no embeddings for model {0:?}")]
    NoEmbeddings(String),
    #[error("missing directed score for (vocals {vocal:?}, accompaniment {accompaniment:?})")]
    MissingPair { vocal: String, accompaniment: String },
    #[error("need at least {needed} items, got {got}")]
    TooSmall { needed: usize, got: usize },
    #[error("unknown song {0:?}")]
    UnknownSong(String),
    #[error("inputs differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("song sets differ: only in embeddings {only_embeddings:?}, only in scores {only_scores:?}")]
    SongSetMismatch { only_embeddings: Vec<String>, only_scores: Vec<String> },
    #[error("threshold must be finite and >= 0, got {0}")]
    InvalidThreshold(f64),
}

/// `<u, v> / (|u| |v|)`, clamped to `[-1, 1]`.
pub fn cosine_similarity<T: Real>(u: &[T], v: &[T]) -> Result<T, CompatError> {
    if u.len() != v.len() {
        return Err(CompatError::DimensionMismatch(u.len(), v.len()));
    }
    let (mut dot, mut uu, mut vv) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in u.iter().zip(v) {
        dot = dot + a * b;
        uu = uu + a * a;
        vv = vv + b * b;
    }
    if uu <= T::zero() || vv <= T::zero() {
        return Err(CompatError::ZeroNorm);
    }
    let c = dot / (uu.sqrt() * vv.sqrt());
    Ok(c.max(-T::one()).min(T::one()))
}
