use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_to_string, IngestError, Role};
use crate::Real;

/// Fixed-length vector for one (song, role) pair under one model.
#[derive(Debug, Clone, PartialEq)]
pub struct StemEmbedding<T = f64> {
    pub song_id: String,
    pub role: Role,
    pub model_id: String,
    pub vector: Vec<T>,
}

impl<T: Real> StemEmbedding<T> {
    pub fn new(song_id: impl Into<String>, role: Role, model_id: impl Into<String>, vector: Vec<T>) -> Self {
        StemEmbedding { song_id: song_id.into(), role, model_id: model_id.into(), vector }
    }

    pub fn norm(&self) -> T {
        self.vector.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    pub fn cast<U: Real>(&self) -> StemEmbedding<U> {
        StemEmbedding {
            song_id: self.song_id.clone(),
            role: self.role,
            model_id: self.model_id.clone(),
            vector: self.vector.iter().map(|x| U::lit(x.as_f64())).collect(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EmbeddingFile {
    pub model: String,
    pub dim: usize,
    pub entries: Vec<EmbeddingEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EmbeddingEntry {
    pub song_id: String,
    pub stem: Role,
    pub vector: Vec<f64>,
}

impl EmbeddingFile {
    pub fn from_embeddings(model: &str, embeddings: &[StemEmbedding<f64>]) -> Self {
        EmbeddingFile {
            model: model.to_string(),
            dim: embeddings.first().map_or(0, |e| e.vector.len()),
            entries: embeddings
                .iter()
                .map(|e| EmbeddingEntry { song_id: e.song_id.clone(), stem: e.role, vector: e.vector.clone() })
                .collect(),
        }
    }
}

/// Parses an embedding document, checking dimensions, duplicates and norms.
pub fn parse_embeddings(text: &str, origin: &str) -> Result<Vec<StemEmbedding<f64>>, IngestError> {
    let file: EmbeddingFile = serde_json::from_str(text).map_err(|e| IngestError::Parse {
        path: origin.to_string(),
        message: e.to_string(),
    })?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(file.entries.len());
    for entry in file.entries {
        if entry.vector.len() != file.dim {
            return Err(IngestError::DimensionMismatch {
                path: origin.to_string(),
                model: file.model.clone(),
                song_id: entry.song_id,
                role: entry.stem,
                expected: file.dim,
                found: entry.vector.len(),
            });
        }
        if !seen.insert((entry.song_id.clone(), entry.stem)) {
            return Err(IngestError::DuplicateEmbedding {
                path: origin.to_string(),
                model: file.model.clone(),
                song_id: entry.song_id,
                role: entry.stem,
            });
        }
        let norm_sq: f64 = entry.vector.iter().map(|x| x * x).sum();
        if !(norm_sq > 0.0) || !norm_sq.is_finite() {
            return Err(IngestError::ZeroNorm {
                path: origin.to_string(),
                model: file.model.clone(),
                song_id: entry.song_id,
                role: entry.stem,
            });
        }
        out.push(StemEmbedding::new(entry.song_id, entry.stem, file.model.clone(), entry.vector));
    }
    Ok(out)
}

pub fn load_embeddings(path: &Path) -> Result<Vec<StemEmbedding<f64>>, IngestError> {
    let text = read_to_string(path)?;
    parse_embeddings(&text, &path.display().to_string())
}
