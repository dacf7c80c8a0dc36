use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{kmeans, silhouette_score_with, ClusterModel, ClusteringConfig};
use crate::embedding::{check_dimensions, EmbeddingVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSelectionResult {
    pub k_star: usize,
    /// Silhouette score for every k in the sweep.
    pub scores: BTreeMap<usize, f64>,
    pub model: ClusterModel,
}

/// Sweeps k over `[k_min, k_max]` and keeps the k with the highest
/// silhouette score; the smallest k wins ties.
pub fn find_optimal_k(vectors: &[EmbeddingVector], config: &ClusteringConfig) -> Result<KSelectionResult> {
    let m = vectors.len();
    if m < 3 {
        return Err(Error::TooFewSamples { m });
    }
    check_dimensions(vectors)?;
    let (k_min, k_max) = config.k_range(m);
    if k_min < 2 || k_min > k_max || k_max > m - 1 {
        return Err(Error::InvalidConfig(format!(
            "k range [{k_min}, {k_max}] must satisfy 2 <= k_min <= k_max <= m - 1 = {}",
            m - 1
        )));
    }

    let ks: Vec<usize> = (k_min..=k_max).collect();
    let evaluated = config
        .execution
        .map_range(ks.len(), |idx| -> Result<(ClusterModel, f64)> {
            let model = kmeans(vectors, ks[idx], config)?;
            let score = silhouette_score_with(vectors, &model.labels, config.execution)?.score;
            Ok((model, score))
        });

    let mut scores = BTreeMap::new();
    let mut best: Option<(usize, f64, ClusterModel)> = None;
    for (k, outcome) in ks.iter().copied().zip(evaluated) {
        let (model, score) = outcome?;
        scores.insert(k, score);
        if best.as_ref().is_none_or(|(_, s, _)| score > *s) {
            best = Some((k, score, model));
        }
    }
    let (k_star, _, model) = best.expect("non-empty sweep");
    Ok(KSelectionResult { k_star, scores, model })
}
