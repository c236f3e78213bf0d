//! Two-song mashup engine.
//!
//! The crate is organised in the order data flows through it:
//!
//! - [`ingest`]: parse and validate track analyses, embeddings and
//!   compatibility scores, and filter a library by key and duration.
//! - [`audio`]: WAV I/O and windowed-sinc resampling.
//! - [`tsm`]: WSOLA time-scale modification, pitch shifting and
//!   beat-grid warping.
//! - [`align`]: turns two analysed songs into a [`MashupPlan`].
//! - [`render`]: executes a plan against the stems and mixes the result.
//! - [`compat`]: directed similarity matrices, asymmetry, clustering,
//!   adjusted Rand index and rank correlations.
//! - [`library`]: the on-disk library layout used by the CLI and service.
//!
//! Numeric code is generic over [`Real`]; the aliases below fix the
//! scalar for the common cases.

pub mod align;
pub mod audio;
pub mod compat;
mod error;
pub mod ingest;
pub mod library;
pub mod render;
pub mod scalar;
pub mod synth;
pub mod tsm;

pub use align::{MashupPlan, RoleAssignment};
pub use audio::{AudioBuffer, Role, Stem};
pub use error::{Error, Result};
pub use ingest::{Key, Mode, Segment, StemEmbedding, TrackAnalysis};
pub use library::Library;
pub use scalar::Real;

/// Single-precision audio, the format stems are rendered in.
pub type AudioBufferF32 = AudioBuffer<f32>;
/// Double-precision audio.
pub type AudioBufferF64 = AudioBuffer<f64>;
pub type StemF32 = Stem<f32>;
/// Similarity matrix in double precision.
pub type ScoreMatrix = compat::DirectedScoreMatrix<f64>;
pub type CorrelationReportF64 = compat::CorrelationReport<f64>;
