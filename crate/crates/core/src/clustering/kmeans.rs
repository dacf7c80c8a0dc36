use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ClusterModel, ClusteringConfig};
use crate::embedding::{check_dimensions, squared_euclidean, EmbeddingVector};
use crate::error::{Error, Result};

/// One seeded Lloyd run together with its per-iteration inertia.
#[derive(Debug, Clone)]
pub struct LloydRun {
    pub model: ClusterModel,
    /// Inertia after each assignment step; non-increasing.
    pub inertia_trace: Vec<f64>,
}

/// Best-of-`restarts` Lloyd k-means. Restart `r` is seeded with
/// `config.seed + r`; the lowest inertia wins, earliest restart on ties.
pub fn kmeans(vectors: &[EmbeddingVector], k: usize, config: &ClusteringConfig) -> Result<ClusterModel> {
    validate(vectors, k)?;
    let restarts = config.restarts.max(1);
    let runs = config.execution.map_range(restarts, |r| {
        lloyd_unchecked(vectors, k, config.seed.wrapping_add(r as u64), config)
    });
    let mut best: Option<LloydRun> = None;
    for run in runs {
        if best.as_ref().is_none_or(|b| run.model.inertia < b.model.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart").model)
}

/// A single Lloyd run from k-means++ seeding with `seed`.
pub fn lloyd_run(vectors: &[EmbeddingVector], k: usize, seed: u64, config: &ClusteringConfig) -> Result<LloydRun> {
    validate(vectors, k)?;
    Ok(lloyd_unchecked(vectors, k, seed, config))
}

fn validate(vectors: &[EmbeddingVector], k: usize) -> Result<()> {
    check_dimensions(vectors)?;
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    if k > vectors.len() {
        return Err(Error::KTooLarge { k, m: vectors.len() });
    }
    Ok(())
}

fn lloyd_unchecked(vectors: &[EmbeddingVector], k: usize, seed: u64, config: &ClusteringConfig) -> LloydRun {
    let points: Vec<&[f64]> = vectors.iter().map(|v| v.as_slice()).collect();
    let mut centroids = plus_plus_init(&points, k, seed);
    let mut labels: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    let mut converged = false;

    for _ in 0..config.max_iterations.max(1) {
        let mut next = assign(&points, &centroids);
        repair_empty(&points, &mut centroids, &mut next, k);
        trace.push(inertia(&points, &centroids, &next));
        let changed = next != labels;
        labels = next;
        if !changed {
            converged = true;
            break;
        }
        let updated = means(&points, &labels, k);
        let shift = centroids
            .iter()
            .zip(&updated)
            .map(|(a, b)| squared_euclidean(a, b))
            .fold(0.0, f64::max)
            .sqrt();
        centroids = updated;
        if shift <= config.tolerance {
            break;
        }
    }

    if !converged {
        // Centroids moved since the last assignment.
        let mut next = assign(&points, &centroids);
        repair_empty(&points, &mut centroids, &mut next, k);
        trace.push(inertia(&points, &centroids, &next));
        labels = next;
    }

    let inertia = *trace.last().expect("at least one iteration");
    LloydRun {
        model: ClusterModel {
            k,
            centroids: centroids
                .into_iter()
                .map(|c| EmbeddingVector::new(c).expect("finite centroid"))
                .collect(),
            labels,
            inertia,
        },
        inertia_trace: trace,
    }
}

fn plus_plus_init(points: &[&[f64]], k: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = points.len();
    let mut centroids = vec![points[rng.random_range(0..m)].to_vec()];
    let mut nearest: Vec<f64> = points.iter().map(|p| squared_euclidean(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &d) in nearest.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            // Rounding can leave `target` just past the final sum.
            chosen.unwrap_or_else(|| nearest.iter().rposition(|&d| d > 0.0).unwrap())
        } else {
            rng.random_range(0..m)
        };
        let c = points[pick].to_vec();
        for (d, p) in nearest.iter_mut().zip(points) {
            *d = d.min(squared_euclidean(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Nearest centroid per point; ties go to the lower centroid index.
pub(crate) fn nearest_centroid(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = squared_euclidean(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn assign(points: &[&[f64]], centroids: &[Vec<f64>]) -> Vec<usize> {
    points.iter().map(|p| nearest_centroid(p, centroids).0).collect()
}

fn inertia(points: &[&[f64]], centroids: &[Vec<f64>], labels: &[usize]) -> f64 {
    points
        .iter()
        .zip(labels)
        .map(|(p, &l)| squared_euclidean(p, &centroids[l]))
        .sum()
}

fn means(points: &[&[f64]], labels: &[usize], k: usize) -> Vec<Vec<f64>> {
    let dim = points[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        counts[l] += 1;
        for (s, x) in sums[l].iter_mut().zip(p.iter()) {
            *s += x;
        }
    }
    for (s, &n) in sums.iter_mut().zip(&counts) {
        let n = n as f64;
        s.iter_mut().for_each(|x| *x /= n);
    }
    sums
}

/// Moves the point farthest from its centroid (taken from a cluster with
/// more than one member) into each empty cluster and recenters it there.
fn repair_empty(points: &[&[f64]], centroids: &mut [Vec<f64>], labels: &mut [usize], k: usize) {
    let mut counts = vec![0usize; k];
    for &l in labels.iter() {
        counts[l] += 1;
    }
    for c in 0..k {
        if counts[c] > 0 {
            continue;
        }
        let mut far: Option<(usize, f64)> = None;
        for (i, p) in points.iter().enumerate() {
            if counts[labels[i]] < 2 {
                continue;
            }
            let d = squared_euclidean(p, &centroids[labels[i]]);
            if far.is_none_or(|(_, best)| d > best) {
                far = Some((i, d));
            }
        }
        let (i, _) = far.expect("k <= m guarantees a donor cluster");
        counts[labels[i]] -= 1;
        labels[i] = c;
        counts[c] = 1;
        centroids[c] = points[i].to_vec();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::mean_embedding;
    use crate::exec::Execution;
    use rand_distr::{Distribution, Normal};

    fn ev(v: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(v.to_vec()).unwrap()
    }

    fn blobs(seed: u64, per: usize, sigma: f64) -> (Vec<EmbeddingVector>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, sigma).unwrap();
        let centers = [[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]];
        let mut vs = Vec::new();
        let mut truth = Vec::new();
        for (c, center) in centers.iter().enumerate() {
            for _ in 0..per {
                vs.push(ev(&[
                    center[0] + noise.sample(&mut rng),
                    center[1] + noise.sample(&mut rng),
                ]));
                truth.push(c);
            }
        }
        (vs, truth)
    }

    #[test]
    fn k_one_is_the_mean() {
        let vs: Vec<_> = (0..7).map(|i| ev(&[i as f64, (i * i) as f64 * 0.3])).collect();
        let model = kmeans(&vs, 1, &ClusteringConfig::default()).unwrap();
        let mean = mean_embedding(&vs).unwrap();
        assert_eq!(model.labels, vec![0; 7]);
        for (a, b) in model.centroids[0].as_slice().iter().zip(mean.as_slice()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn point_masses() {
        let mut vs = vec![ev(&[0.0, 0.0]); 3];
        vs.extend(vec![ev(&[10.0, 10.0]); 3]);
        let model = kmeans(&vs, 2, &ClusteringConfig::default()).unwrap();
        assert_eq!(model.inertia, 0.0);
        let mut cs: Vec<Vec<f64>> = model.centroids.iter().map(|c| c.as_slice().to_vec()).collect();
        cs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(cs, vec![vec![0.0, 0.0], vec![10.0, 10.0]]);
    }

    #[test]
    fn recovers_planted_blobs() {
        let (vs, truth) = blobs(42, 20, 0.1);
        let model = kmeans(&vs, 3, &ClusteringConfig::default()).unwrap();
        // Same partition up to relabeling: a consistent bijection exists.
        let mut map = [usize::MAX; 3];
        for (&t, &l) in truth.iter().zip(&model.labels) {
            if map[t] == usize::MAX {
                map[t] = l;
            }
            assert_eq!(map[t], l);
        }
        let mut used = map.to_vec();
        used.sort();
        assert_eq!(used, vec![0, 1, 2]);
    }

    #[test]
    fn errors() {
        let vs = vec![ev(&[0.0]), ev(&[1.0])];
        assert!(matches!(
            kmeans(&vs, 3, &ClusteringConfig::default()),
            Err(Error::KTooLarge { k: 3, m: 2 })
        ));
        let mixed = vec![ev(&[0.0]), ev(&[1.0, 2.0])];
        assert!(matches!(
            kmeans(&mixed, 1, &ClusteringConfig::default()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn no_empty_clusters_with_duplicates() {
        let mut vs = vec![ev(&[0.0, 0.0]); 5];
        vs.push(ev(&[1.0, 1.0]));
        vs.push(ev(&[2.0, 0.0]));
        for k in 1..=vs.len() {
            let model = kmeans(&vs, k, &ClusteringConfig::default()).unwrap();
            assert!(model.sizes().iter().all(|&s| s > 0), "k={k}: {:?}", model.sizes());
        }
    }

    #[test]
    fn repair_moves_farthest_point() {
        let pts: Vec<Vec<f64>> = vec![vec![0.0], vec![1.0], vec![5.0]];
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let mut centroids = vec![vec![0.0], vec![100.0]];
        let mut labels = vec![0, 0, 0];
        repair_empty(&refs, &mut centroids, &mut labels, 2);
        assert_eq!(labels, vec![0, 0, 1]);
        assert_eq!(centroids[1], vec![5.0]);
    }

    #[test]
    fn deterministic_across_execution_modes() {
        let (vs, _) = blobs(7, 15, 2.0);
        let seq = ClusteringConfig::default().with_execution(Execution::Sequential);
        let par = ClusteringConfig::default().with_execution(Execution::Parallel);
        assert_eq!(kmeans(&vs, 4, &seq).unwrap(), kmeans(&vs, 4, &par).unwrap());
    }
}
