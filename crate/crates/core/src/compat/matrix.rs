use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{cosine_similarity, CompatError};
use crate::ingest::{CocolaScoreSet, Role, StemEmbedding};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreSource {
    Cocola,
    EmbeddingCosine,
}

/// Square matrix where `get(v, a)` scores the vocals of song `v` over the
/// accompaniment of song `a`. Missing entries (normally the diagonal) are
/// `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectedScoreMatrix<T> {
    pub song_ids: Vec<String>,
    values: Vec<Option<T>>,
    pub source: ScoreSource,
    pub model_id: Option<String>,
}

impl<T: Real> DirectedScoreMatrix<T> {
    /// Builds from row-major values; panics if `values` is not `n × n`.
    pub fn from_rows(song_ids: Vec<String>, rows: Vec<Vec<Option<T>>>, source: ScoreSource, model_id: Option<String>) -> Self {
        let n = song_ids.len();
        assert!(rows.len() == n && rows.iter().all(|r| r.len() == n), "matrix must be square");
        DirectedScoreMatrix { song_ids, values: rows.into_iter().flatten().collect(), source, model_id }
    }

    pub fn len(&self) -> usize {
        self.song_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.song_ids.is_empty()
    }

    pub fn get(&self, vocal: usize, accompaniment: usize) -> Option<T> {
        self.values[vocal * self.len() + accompaniment]
    }

    pub fn index_of(&self, song: &str) -> Option<usize> {
        self.song_ids.iter().position(|s| s == song)
    }

    pub fn rows(&self) -> Vec<Vec<Option<T>>> {
        self.values.chunks(self.len().max(1)).map(|r| r.to_vec()).collect()
    }

    /// Entries in row-major (vocal, accompaniment) order, diagonal skipped
    /// unless `include_diagonal`. Missing entries are skipped.
    pub fn flatten(&self, include_diagonal: bool) -> Vec<T> {
        let n = self.len();
        let mut out = Vec::with_capacity(n * n);
        for v in 0..n {
            for a in 0..n {
                if v == a && !include_diagonal {
                    continue;
                }
                if let Some(x) = self.get(v, a) {
                    out.push(x);
                }
            }
        }
        out
    }

    /// CSV with a header row and column of song ids; empty cells are missing.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["vocals\\accompaniment".to_string()];
        header.extend(self.song_ids.iter().cloned());
        w.write_record(&header).expect("in-memory csv write");
        for (v, id) in self.song_ids.iter().enumerate() {
            let mut row = vec![id.clone()];
            for a in 0..self.len() {
                row.push(self.get(v, a).map(|x| format!("{}", x.as_f64())).unwrap_or_default());
            }
            w.write_record(&row).expect("in-memory csv write");
        }
        String::from_utf8(w.into_inner().expect("csv flush")).expect("utf-8")
    }
}

/// Cosine similarity between every song's vocals and every song's
/// accompaniment under `model_id`. Song order follows first appearance.
pub fn build_embedding_matrix<T: Real>(
    embeddings: &[StemEmbedding<T>],
    model_id: &str,
) -> Result<DirectedScoreMatrix<T>, CompatError> {
    let mut song_ids: Vec<String> = Vec::new();
    let mut vocals: HashMap<&str, &[T]> = HashMap::new();
    let mut accomp: HashMap<&str, &[T]> = HashMap::new();
    for e in embeddings.iter().filter(|e| e.model_id == model_id) {
        if !vocals.contains_key(e.song_id.as_str()) && !accomp.contains_key(e.song_id.as_str()) {
            song_ids.push(e.song_id.clone());
        }
        match e.role {
            Role::Vocals => vocals.insert(&e.song_id, &e.vector),
            Role::Accompaniment => accomp.insert(&e.song_id, &e.vector),
        };
    }
    if song_ids.is_empty() {
        return Err(CompatError::NoEmbeddings(model_id.to_string()));
    }
    for id in &song_ids {
        for (role, map) in [(Role::Vocals, &vocals), (Role::Accompaniment, &accomp)] {
            if !map.contains_key(id.as_str()) {
                return Err(CompatError::MissingRole { song: id.clone(), role, model: model_id.to_string() });
            }
        }
    }
    let rows = song_ids
        .iter()
        .map(|v| {
            song_ids
                .iter()
                .map(|a| cosine_similarity(vocals[v.as_str()], accomp[a.as_str()]).map(Some))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DirectedScoreMatrix::from_rows(song_ids, rows, ScoreSource::EmbeddingCosine, Some(model_id.to_string())))
}

/// Matrix of directed scores over `song_ids`. Every ordered off-diagonal
/// pair must be present; the diagonal is filled only from self-pairs.
pub fn build_cocola_matrix<T: Real>(scores: &CocolaScoreSet, song_ids: &[String]) -> Result<DirectedScoreMatrix<T>, CompatError> {
    let mut rows = Vec::with_capacity(song_ids.len());
    for v in song_ids {
        let mut row = Vec::with_capacity(song_ids.len());
        for a in song_ids {
            let score = scores.get(v, a).map(T::lit);
            if v != a && score.is_none() {
                return Err(CompatError::MissingPair { vocal: v.clone(), accompaniment: a.clone() });
            }
            row.push(score);
        }
        rows.push(row);
    }
    Ok(DirectedScoreMatrix::from_rows(song_ids.to_vec(), rows, ScoreSource::Cocola, None))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryStats<T> {
    pub mean_abs_diff: T,
    pub max_abs_diff: T,
    /// `|M - M^T|_F / |M + M^T|_F` over off-diagonal entries.
    pub frobenius_index: T,
}

/// How far `m[i][j]` departs from `m[j][i]` over off-diagonal pairs.
pub fn asymmetry_stats<T: Real>(m: &DirectedScoreMatrix<T>) -> Result<AsymmetryStats<T>, CompatError> {
    let n = m.len();
    if n < 2 {
        return Err(CompatError::TooSmall { needed: 2, got: n });
    }
    let (mut sum, mut max, mut count) = (T::zero(), T::zero(), 0usize);
    let (mut anti, mut sym) = (T::zero(), T::zero());
    for i in 0..n {
        for j in i + 1..n {
            let (Some(a), Some(b)) = (m.get(i, j), m.get(j, i)) else {
                continue;
            };
            let d = (a - b).abs();
            sum = sum + d;
            max = max.max(d);
            count += 1;
            // Each unordered pair contributes twice to the Frobenius sums.
            let two = T::lit(2.0);
            anti = anti + two * d * d;
            sym = sym + two * (a + b) * (a + b);
        }
    }
    let mean = if count > 0 { sum / T::from_usize_lossy(count) } else { T::zero() };
    let frobenius_index = if anti == T::zero() {
        T::zero()
    } else if sym == T::zero() {
        T::infinity()
    } else {
        anti.sqrt() / sym.sqrt()
    };
    Ok(AsymmetryStats { mean_abs_diff: mean, max_abs_diff: max, frobenius_index })
}

/// Donor candidates for `base_song`, best first.
///
/// When the base supplies the accompaniment, donors are ranked by how well
/// their vocals sit on it (`m[donor][base]`); when the base supplies the
/// vocals, by `m[base][donor]`. Ties go to the lexicographically smaller id.
pub fn rank_candidates<T: Real>(
    m: &DirectedScoreMatrix<T>,
    base_song: &str,
    base_role: Role,
) -> Result<Vec<(String, T)>, CompatError> {
    let base = m.index_of(base_song).ok_or_else(|| CompatError::UnknownSong(base_song.to_string()))?;
    let mut ranked: Vec<(String, T)> = (0..m.len())
        .filter(|&i| i != base)
        .filter_map(|i| {
            let score = match base_role {
                Role::Accompaniment => m.get(i, base),
                Role::Vocals => m.get(base, i),
            };
            score.map(|s| (m.song_ids[i].clone(), s))
        })
        .collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then_with(|| a.0.cmp(&b.0)));
    Ok(ranked)
}
