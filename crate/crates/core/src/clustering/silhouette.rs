use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::embedding::{check_dimensions, EmbeddingVector};
use crate::error::{Error, Result};
use crate::exec::Execution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SilhouetteResult {
    pub per_sample: Vec<f64>,
    /// Mean of `per_sample`.
    pub score: f64,
}

pub fn silhouette_score(vectors: &[EmbeddingVector], labels: &[usize]) -> Result<SilhouetteResult> {
    silhouette_score_with(vectors, labels, Execution::default())
}

/// Euclidean silhouette. For sample `i` with cohesion `c` (mean distance to
/// the other members of its cluster) and separation `s` (smallest mean
/// distance to another cluster) the value is `(s - c) / max(c, s)`; members
/// of singleton clusters score exactly 0, as does `c = s = 0`.
pub fn silhouette_score_with(
    vectors: &[EmbeddingVector],
    labels: &[usize],
    execution: Execution,
) -> Result<SilhouetteResult> {
    if labels.len() != vectors.len() {
        return Err(Error::LengthMismatch {
            expected: vectors.len(),
            found: labels.len(),
        });
    }
    if vectors.is_empty() {
        return Err(Error::SingleCluster);
    }
    check_dimensions(vectors)?;

    let mut clusters: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        clusters.entry(l).or_default().push(i);
    }
    if clusters.len() < 2 {
        return Err(Error::SingleCluster);
    }
    let clusters: Vec<(usize, Vec<usize>)> = clusters.into_iter().collect();

    let per_sample = execution.map_range(vectors.len(), |i| {
        let own = labels[i];
        let mut cohesion = 0.0;
        let mut own_size = 0;
        let mut separation = f64::INFINITY;
        for (label, members) in &clusters {
            let total: f64 = members
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| vectors[i].distance(&vectors[j]))
                .sum();
            if *label == own {
                own_size = members.len();
                cohesion = if own_size > 1 {
                    total / (own_size - 1) as f64
                } else {
                    0.0
                };
            } else {
                separation = separation.min(total / members.len() as f64);
            }
        }
        if own_size <= 1 {
            return 0.0;
        }
        let denom = cohesion.max(separation);
        if denom == 0.0 {
            0.0
        } else {
            (separation - cohesion) / denom
        }
    });
    let score = per_sample.iter().sum::<f64>() / per_sample.len() as f64;
    Ok(SilhouetteResult { per_sample, score })
}
