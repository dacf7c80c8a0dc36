//! Wordcloud weighting, centroid correlation and descriptive statistics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::annotation::ClusterAnnotation;
use crate::embedding::{cosine_similarity, EmbeddingVector};
use crate::error::{Error, Result};

pub const DEFAULT_MERGE_THRESHOLD: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WordcloudScope {
    Cluster,
    Unified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordcloudEntry {
    pub token: String,
    pub cluster_id: usize,
    pub weight: f64,
    pub scope: WordcloudScope,
}

/// Cluster-size fractions `N_i / m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCoefficients {
    pub rho: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterStats {
    pub cluster_id: usize,
    pub size: usize,
    pub min_words: usize,
    pub max_words: usize,
    pub avg_words: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentroidCorrelation {
    pub matrix: Vec<Vec<f64>>,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeSuggestion {
    pub first: usize,
    pub second: usize,
    pub similarity: f64,
}

pub fn density_coefficients(cluster_sizes: &[usize], m: usize) -> Result<DensityCoefficients> {
    if cluster_sizes.is_empty() || m == 0 {
        return Err(Error::EmptyInput);
    }
    if let Some(c) = cluster_sizes.iter().position(|&n| n == 0) {
        return Err(Error::EmptyCluster(c));
    }
    let sum: usize = cluster_sizes.iter().sum();
    if sum != m {
        return Err(Error::SizeSumMismatch { sum, m });
    }
    Ok(DensityCoefficients {
        rho: cluster_sizes.iter().map(|&n| n as f64 / m as f64).collect(),
    })
}

/// Cluster-scope entries: each annotation's prominent tokens with raw weights.
pub fn cluster_wordcloud(annotation: &ClusterAnnotation) -> Vec<WordcloudEntry> {
    annotation
        .prominent
        .iter()
        .map(|tw| WordcloudEntry {
            token: tw.token.clone(),
            cluster_id: annotation.cluster_id,
            weight: tw.weight,
            scope: WordcloudScope::Cluster,
        })
        .collect()
}

/// Density-scaled entries `rho_i * w` across all clusters, sorted by weight
/// descending (then cluster id, then token). A token owned by two clusters
/// yields two entries. `annotations[i]` pairs with `rho.rho[i]`.
pub fn unified_wordcloud(annotations: &[ClusterAnnotation], rho: &DensityCoefficients) -> Result<Vec<WordcloudEntry>> {
    if annotations.len() != rho.rho.len() {
        return Err(Error::LengthMismatch {
            expected: rho.rho.len(),
            found: annotations.len(),
        });
    }
    let mut entries: Vec<WordcloudEntry> = annotations
        .iter()
        .zip(&rho.rho)
        .flat_map(|(a, &r)| {
            a.prominent.iter().map(move |tw| WordcloudEntry {
                token: tw.token.clone(),
                cluster_id: a.cluster_id,
                weight: r * tw.weight,
                scope: WordcloudScope::Unified,
            })
        })
        .collect();
    entries.sort_by(|a, b| {
        b.weight
            .total_cmp(&a.weight)
            .then(a.cluster_id.cmp(&b.cluster_id))
            .then_with(|| a.token.cmp(&b.token))
    });
    Ok(entries)
}

/// Pairwise cosine similarity between centroids, unit diagonal.
pub fn centroid_correlation(centroids: &[EmbeddingVector], threshold: f64) -> Result<CentroidCorrelation> {
    let k = centroids.len();
    if k < 2 {
        return Err(Error::InvalidConfig(format!(
            "centroid correlation needs at least 2 centroids, got {k}"
        )));
    }
    if centroids.iter().any(|c| c.norm() == 0.0) {
        return Err(Error::ZeroVector);
    }
    let mut matrix = vec![vec![0.0; k]; k];
    for i in 0..k {
        matrix[i][i] = 1.0;
        for j in i + 1..k {
            let s = cosine_similarity(&centroids[i], &centroids[j])?;
            matrix[i][j] = s;
            matrix[j][i] = s;
        }
    }
    Ok(CentroidCorrelation { matrix, threshold })
}

/// Upper-triangle pairs at or above the threshold, most similar first.
pub fn suggest_merges(corr: &CentroidCorrelation) -> Vec<MergeSuggestion> {
    let k = corr.matrix.len();
    let mut pairs: Vec<MergeSuggestion> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .filter(|&(i, j)| corr.matrix[i][j] >= corr.threshold)
        .map(|(i, j)| MergeSuggestion {
            first: i,
            second: j,
            similarity: corr.matrix[i][j],
        })
        .collect();
    pairs.sort_by(|a, b| {
        b.similarity
            .total_cmp(&a.similarity)
            .then((a.first, a.second).cmp(&(b.first, b.second)))
    });
    pairs
}

/// Whitespace word-count statistics of raw responses per cluster.
pub fn cluster_stats<S: AsRef<str>>(clusters: &BTreeMap<usize, Vec<S>>) -> Result<Vec<ClusterStats>> {
    clusters
        .iter()
        .map(|(&id, members)| {
            if members.is_empty() {
                return Err(Error::EmptyCluster(id));
            }
            let counts: Vec<usize> = members.iter().map(|r| r.as_ref().split_whitespace().count()).collect();
            Ok(ClusterStats {
                cluster_id: id,
                size: counts.len(),
                min_words: *counts.iter().min().unwrap(),
                max_words: *counts.iter().max().unwrap(),
                avg_words: counts.iter().sum::<usize>() as f64 / counts.len() as f64,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::TokenWeight;
    use proptest::prelude::*;

    fn ann(id: usize, toks: &[(&str, f64)]) -> ClusterAnnotation {
        ClusterAnnotation {
            cluster_id: id,
            prominent: toks
                .iter()
                .map(|&(t, w)| TokenWeight {
                    token: t.into(),
                    weight: w,
                })
                .collect(),
            label: String::new(),
            warning: None,
        }
    }

    #[test]
    fn density_examples() {
        assert_eq!(density_coefficients(&[7], 7).unwrap().rho, vec![1.0]);
        assert!(matches!(
            density_coefficients(&[3, 3], 7),
            Err(Error::SizeSumMismatch { sum: 6, m: 7 })
        ));
        assert!(matches!(density_coefficients(&[0, 3], 3), Err(Error::EmptyCluster(0))));
    }

    #[test]
    fn unified_examples() {
        let one = vec![ann(0, &[("acid", 0.7), ("base", 0.4)])];
        let rho = density_coefficients(&[4], 4).unwrap();
        let u = unified_wordcloud(&one, &rho).unwrap();
        assert_eq!(u.iter().map(|e| e.weight).collect::<Vec<_>>(), vec![0.7, 0.4]);

        let two = vec![ann(0, &[("atom", 0.5)]), ann(1, &[("atom", 0.5)])];
        let rho = density_coefficients(&[3, 1], 4).unwrap();
        let u = unified_wordcloud(&two, &rho).unwrap();
        assert_eq!(u.len(), 2);
        assert_eq!((u[0].cluster_id, u[0].weight), (0, 0.375));
        assert_eq!((u[1].cluster_id, u[1].weight), (1, 0.125));
        assert!(u.iter().all(|e| e.scope == WordcloudScope::Unified));

        assert!(matches!(
            unified_wordcloud(&two, &density_coefficients(&[1], 1).unwrap()),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn correlation_examples() {
        let a = EmbeddingVector::new(vec![1.0, 2.0]).unwrap();
        let c = centroid_correlation(&[a.clone(), a.clone()], 0.8).unwrap();
        assert_eq!(c.matrix, vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        let o = EmbeddingVector::new(vec![-2.0, 1.0]).unwrap();
        let c = centroid_correlation(&[a.clone(), o], 0.8).unwrap();
        assert_eq!(c.matrix[0][1], 0.0);
        let z = EmbeddingVector::new(vec![0.0, 0.0]).unwrap();
        assert!(matches!(centroid_correlation(&[a, z], 0.8), Err(Error::ZeroVector)));
    }

    #[test]
    fn merge_examples() {
        let corr = CentroidCorrelation {
            matrix: vec![vec![1.0, 0.85], vec![0.85, 1.0]],
            threshold: 0.8,
        };
        let m = suggest_merges(&corr);
        assert_eq!((m[0].first, m[0].second), (0, 1));

        let corr = CentroidCorrelation {
            matrix: vec![vec![1.0, 0.3], vec![0.3, 1.0]],
            threshold: 0.8,
        };
        assert!(suggest_merges(&corr).is_empty());

        let corr = CentroidCorrelation {
            matrix: vec![vec![1.0, 0.9, 0.1], vec![0.9, 1.0, 0.82], vec![0.1, 0.82, 1.0]],
            threshold: 0.8,
        };
        let pairs: Vec<_> = suggest_merges(&corr).iter().map(|s| (s.first, s.second)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn stats_examples() {
        let mut clusters = BTreeMap::new();
        clusters.insert(0, vec!["a b c"]);
        clusters.insert(1, vec!["a b", "a b c d"]);
        let s = cluster_stats(&clusters).unwrap();
        assert_eq!((s[0].min_words, s[0].max_words, s[0].avg_words), (3, 3, 3.0));
        assert_eq!((s[1].min_words, s[1].max_words, s[1].avg_words), (2, 4, 3.0));
        assert_eq!(s[1].size, 2);
        clusters.insert(2, vec![]);
        assert!(matches!(cluster_stats(&clusters), Err(Error::EmptyCluster(2))));
    }

    proptest! {
        #[test]
        fn rho_sums_to_one(sizes in prop::collection::vec(1usize..50, 1..12)) {
            let m = sizes.iter().sum();
            let rho = density_coefficients(&sizes, m).unwrap();
            prop_assert!((rho.rho.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            for (i, j) in (0..sizes.len()).flat_map(|i| (0..sizes.len()).map(move |j| (i, j))) {
                if sizes[i] > sizes[j] {
                    prop_assert!(rho.rho[i] > rho.rho[j]);
                }
            }
        }

        #[test]
        #[allow(clippy::needless_range_loop)]
        fn merges_match_brute_force(vals in prop::collection::vec(-1.0f64..1.0, 15), threshold in -1.0f64..1.0) {
            let k = 6;
            let mut matrix = vec![vec![1.0; k]; k];
            let mut it = vals.iter();
            for i in 0..k {
                for j in i + 1..k {
                    let v = *it.next().unwrap();
                    matrix[i][j] = v;
                    matrix[j][i] = v;
                }
            }
            let corr = CentroidCorrelation { matrix: matrix.clone(), threshold };
            let mut got: Vec<_> = suggest_merges(&corr).iter().map(|s| (s.first, s.second)).collect();
            got.sort();
            let mut want = Vec::new();
            for i in 0..k {
                for j in i + 1..k {
                    if matrix[i][j] >= threshold {
                        want.push((i, j));
                    }
                }
            }
            prop_assert_eq!(got, want);
        }
    }
}
