use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{
    agglomerative_cluster, asymmetry_stats, build_cocola_matrix, build_embedding_matrix, correlate, AsymmetryStats,
    CompatError, CorrelationReport, DirectedScoreMatrix, Linkage,
};
use crate::ingest::{CocolaScoreSet, Role, StemEmbedding};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemLabel {
    pub song_id: String,
    pub role: Role,
    pub cluster: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub threshold: f64,
    pub linkage: Linkage,
    pub cluster_count: usize,
    pub items: Vec<ItemLabel>,
}

/// Embedding similarity against directed compatibility scores for one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatReport {
    pub model_id: String,
    pub songs: Vec<String>,
    pub embedding_matrix: DirectedScoreMatrix<f64>,
    pub cocola_matrix: DirectedScoreMatrix<f64>,
    pub embedding_asymmetry: AsymmetryStats<f64>,
    pub cocola_asymmetry: AsymmetryStats<f64>,
    pub correlation: CorrelationReport<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub clustering: Vec<ClusterSummary>,
}

impl CompatReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Builds both matrices over the sorted song set, correlates them over
/// off-diagonal directed pairs in row-major order, and clusters the
/// model's stem embeddings at each threshold.
pub fn compat_report(
    embeddings: &[StemEmbedding<f64>],
    scores: &CocolaScoreSet,
    model_id: &str,
    thresholds: &[f64],
    linkage: Linkage,
) -> Result<CompatReport, CompatError> {
    let mut items: Vec<StemEmbedding<f64>> = embeddings.iter().filter(|e| e.model_id == model_id).cloned().collect();
    if items.is_empty() {
        return Err(CompatError::NoEmbeddings(model_id.to_string()));
    }
    items.sort_by(|a, b| a.song_id.cmp(&b.song_id).then((a.role == Role::Accompaniment).cmp(&(b.role == Role::Accompaniment))));

    let from_embeddings: BTreeSet<String> = items.iter().map(|e| e.song_id.clone()).collect();
    let from_scores: BTreeSet<String> = scores.song_ids().into_iter().collect();
    if from_embeddings != from_scores {
        return Err(CompatError::SongSetMismatch {
            only_embeddings: from_embeddings.difference(&from_scores).cloned().collect(),
            only_scores: from_scores.difference(&from_embeddings).cloned().collect(),
        });
    }
    let songs: Vec<String> = from_embeddings.into_iter().collect();

    let embedding_matrix = build_embedding_matrix(&items, model_id)?;
    debug_assert_eq!(embedding_matrix.song_ids, songs);
    let cocola_matrix = build_cocola_matrix(scores, &songs)?;
    let correlation = correlate(&embedding_matrix.flatten(false), &cocola_matrix.flatten(false))?;

    let mut clustering = Vec::with_capacity(thresholds.len());
    for &threshold in thresholds {
        let c = agglomerative_cluster(&items, threshold, linkage)?;
        clustering.push(ClusterSummary {
            threshold,
            linkage,
            cluster_count: c.cluster_count(),
            items: c
                .item_ids
                .iter()
                .zip(&c.labels)
                .map(|((song_id, role), &cluster)| ItemLabel { song_id: song_id.clone(), role: *role, cluster })
                .collect(),
        });
    }

    Ok(CompatReport {
        model_id: model_id.to_string(),
        embedding_asymmetry: asymmetry_stats(&embedding_matrix)?,
        cocola_asymmetry: asymmetry_stats(&cocola_matrix)?,
        songs,
        embedding_matrix,
        cocola_matrix,
        correlation,
        clustering,
    })
}
