use serde::{Deserialize, Serialize};

use super::{cosine_similarity, CompatError};
use crate::ingest::{Role, StemEmbedding};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Single,
    Complete,
    #[default]
    Average,
}

impl std::str::FromStr for Linkage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            "average" => Ok(Linkage::Average),
            other => Err(format!("unknown linkage {other:?} (expected single, complete or average)")),
        }
    }
}

/// A flat partition of stem embeddings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub item_ids: Vec<(String, Role)>,
    /// Contiguous from 0 in order of first appearance.
    pub labels: Vec<usize>,
    pub threshold: f64,
    pub linkage: Linkage,
}

impl Clustering {
    pub fn cluster_count(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }
}

/// Pairwise `1 - cosine_similarity` between vectors.
pub fn cosine_distance_matrix<T: Real>(vectors: &[&[T]]) -> Result<Vec<Vec<T>>, CompatError> {
    let n = vectors.len();
    let mut d = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let x = T::one() - cosine_similarity(vectors[i], vectors[j])?;
            d[i][j] = x;
            d[j][i] = x;
        }
    }
    Ok(d)
}

/// Agglomerative clustering of the embeddings under cosine distance, cut
/// where the closest pair of clusters is farther apart than `threshold`.
pub fn agglomerative_cluster<T: Real>(
    items: &[StemEmbedding<T>],
    threshold: f64,
    linkage: Linkage,
) -> Result<Clustering, CompatError> {
    if !(threshold >= 0.0) || !threshold.is_finite() {
        return Err(CompatError::InvalidThreshold(threshold));
    }
    let vectors: Vec<&[T]> = items.iter().map(|e| e.vector.as_slice()).collect();
    let dist = cosine_distance_matrix(&vectors)?;
    Ok(Clustering {
        item_ids: items.iter().map(|e| (e.song_id.clone(), e.role)).collect(),
        labels: cluster_distance_matrix(&dist, T::lit(threshold), linkage),
        threshold,
        linkage,
    })
}

/// Cluster labels from a symmetric distance matrix.
///
/// Clusters are identified by their smallest member index. Each step merges
/// the closest pair (Lance–Williams updates), ties going to the
/// lexicographically smallest pair of identifiers; merging stops once the
/// smallest inter-cluster distance exceeds `threshold`.
pub fn cluster_distance_matrix<T: Real>(dist: &[Vec<T>], threshold: T, linkage: Linkage) -> Vec<usize> {
    let n = dist.len();
    let mut d: Vec<Vec<T>> = dist.to_vec();
    let mut size = vec![1usize; n];
    let mut parent: Vec<usize> = (0..n).collect();
    let mut active: Vec<usize> = (0..n).collect();

    while active.len() > 1 {
        let mut best: Option<(usize, usize, T)> = None;
        for (x, &i) in active.iter().enumerate() {
            for &j in &active[x + 1..] {
                if best.is_none_or(|(_, _, b)| d[i][j] < b) {
                    best = Some((i, j, d[i][j]));
                }
            }
        }
        let (i, j, gap) = best.expect("at least two active clusters");
        if gap > threshold {
            break;
        }
        for &k in &active {
            if k == i || k == j {
                continue;
            }
            let merged = match linkage {
                Linkage::Single => d[i][k].min(d[j][k]),
                Linkage::Complete => d[i][k].max(d[j][k]),
                Linkage::Average => {
                    let (si, sj) = (T::from_usize_lossy(size[i]), T::from_usize_lossy(size[j]));
                    (si * d[i][k] + sj * d[j][k]) / (si + sj)
                }
            };
            d[i][k] = merged;
            d[k][i] = merged;
        }
        size[i] += size[j];
        parent[j] = i;
        active.retain(|&k| k != j);
    }

    let root = |mut x: usize| {
        while parent[x] != x {
            x = parent[x];
        }
        x
    };
    let mut label_of = vec![usize::MAX; n];
    let mut next = 0;
    (0..n)
        .map(|item| {
            let r = root(item);
            if label_of[r] == usize::MAX {
                label_of[r] = next;
                next += 1;
            }
            label_of[r]
        })
        .collect()
}
