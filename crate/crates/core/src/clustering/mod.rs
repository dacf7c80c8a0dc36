//! Lloyd k-means, silhouette scoring and silhouette-driven choice of k.

mod kmeans;
mod select;
mod silhouette;

use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingVector;
use crate::exec::Execution;

pub use kmeans::{kmeans, lloyd_run, LloydRun};
pub use select::{find_optimal_k, KSelectionResult};
pub use silhouette::{silhouette_score, silhouette_score_with, SilhouetteResult};

/// Upper end of the default k sweep.
pub const DEFAULT_K_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringConfig {
    pub k_min: usize,
    /// `None` means `min(20, m - 1)`.
    pub k_max: Option<usize>,
    pub max_iterations: usize,
    /// Convergence threshold on the largest centroid shift (Euclidean).
    pub tolerance: f64,
    pub seed: u64,
    pub restarts: usize,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        ClusteringConfig {
            k_min: 2,
            k_max: None,
            max_iterations: 300,
            tolerance: 1e-6,
            seed: 0,
            restarts: 10,
            execution: Execution::default(),
        }
    }
}

impl ClusteringConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    /// The k sweep bounds for `m` samples.
    pub fn k_range(&self, m: usize) -> (usize, usize) {
        let k_max = self.k_max.unwrap_or_else(|| DEFAULT_K_CAP.min(m.saturating_sub(1)));
        (self.k_min, k_max)
    }
}

/// A partition of the input vectors into `k` non-empty clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub k: usize,
    pub centroids: Vec<EmbeddingVector>,
    pub labels: Vec<usize>,
    /// Sum of squared Euclidean distances to the assigned centroid.
    pub inertia: f64,
}

impl ClusterModel {
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Sample indices of each cluster, in input order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.k];
        for (i, &l) in self.labels.iter().enumerate() {
            members[l].push(i);
        }
        members
    }

    /// Relabels clusters so that cluster 0 is the largest; equal sizes are
    /// ordered by their earliest member.
    pub fn canonicalized(&self) -> ClusterModel {
        let members = self.members();
        let mut order: Vec<usize> = (0..self.k).collect();
        order.sort_by_key(|&c| (std::cmp::Reverse(members[c].len()), members[c].first().copied()));
        let mut remap = vec![0; self.k];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        ClusterModel {
            k: self.k,
            centroids: order.iter().map(|&c| self.centroids[c].clone()).collect(),
            labels: self.labels.iter().map(|&l| remap[l]).collect(),
            inertia: self.inertia,
        }
    }
}
