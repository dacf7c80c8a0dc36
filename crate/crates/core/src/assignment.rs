//! Response-to-title assignment by cosine similarity.

use serde::{Deserialize, Serialize};

use crate::embedding::{check_dimensions, cosine_similarity, EmbeddingVector};
use crate::error::{Error, Result};
use crate::exec::Execution;

/// Rows whose best similarity falls below this are flagged as likely
/// off-topic in reports. They are still assigned.
pub const LOW_SIMILARITY_FLAG: f64 = 0.1;

/// Dense `m × l` cosine similarities, rows = responses, columns = labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl AssignmentMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m = rows.len();
        let l = rows.first().map(Vec::len).ok_or(Error::EmptyInput)?;
        if l == 0 {
            return Err(Error::EmptyInput);
        }
        let mut values = Vec::with_capacity(m * l);
        for row in rows {
            if row.len() != l {
                return Err(Error::LengthMismatch {
                    expected: l,
                    found: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite() || v.abs() > 1.0) {
                return Err(Error::InvalidConfig(
                    "assignment entries must be finite and within [-1, 1]".into(),
                ));
            }
            values.extend(row);
        }
        Ok(AssignmentMatrix {
            rows: m,
            cols: l,
            values,
        })
    }

    pub fn responses(&self) -> usize {
        self.rows
    }

    pub fn labels(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentResult {
    pub assigned: Vec<usize>,
    /// Mean winning similarity per label; `None` for labels nobody chose.
    pub per_label_mean: Vec<Option<f64>>,
    /// Population standard deviation of the winning similarities.
    pub per_label_std: Vec<Option<f64>>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelStat {
    pub label: usize,
    pub count: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
}

pub fn build_assignment_matrix(responses: &[EmbeddingVector], labels: &[EmbeddingVector]) -> Result<AssignmentMatrix> {
    build_assignment_matrix_with(responses, labels, Execution::default())
}

pub fn build_assignment_matrix_with(
    responses: &[EmbeddingVector],
    labels: &[EmbeddingVector],
    execution: Execution,
) -> Result<AssignmentMatrix> {
    let dim = check_dimensions(responses)?;
    let label_dim = check_dimensions(labels)?;
    if dim != label_dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: label_dim,
        });
    }
    let rows = execution.map_range(responses.len(), |i| {
        labels
            .iter()
            .map(|l| cosine_similarity(&responses[i], l))
            .collect::<Result<Vec<f64>>>()
    });
    let values = rows.into_iter().collect::<Result<Vec<_>>>()?.concat();
    Ok(AssignmentMatrix {
        rows: responses.len(),
        cols: labels.len(),
        values,
    })
}

/// Row-wise argmax; exact ties go to the smallest label index.
pub fn assign_labels(matrix: &AssignmentMatrix) -> AssignmentResult {
    let l = matrix.labels();
    let assigned: Vec<usize> = (0..matrix.responses())
        .map(|i| {
            let row = matrix.row(i);
            let mut best = 0;
            for j in 1..l {
                if row[j] > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect();

    let mut winners: Vec<Vec<f64>> = vec![Vec::new(); l];
    for (i, &j) in assigned.iter().enumerate() {
        winners[j].push(matrix.get(i, j));
    }
    let (per_label_mean, per_label_std) = winners.iter().map(|w| mean_std(w)).unzip();
    AssignmentResult {
        assigned,
        per_label_mean,
        per_label_std,
        counts: winners.iter().map(Vec::len).collect(),
    }
}

fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (Some(mean), Some(var.sqrt()))
}

/// Per-label winning-similarity statistics as a report table.
pub fn label_similarity_stats(matrix: &AssignmentMatrix, result: &AssignmentResult) -> Result<Vec<LabelStat>> {
    let (m, l) = (matrix.responses(), matrix.labels());
    if result.assigned.len() != m {
        return Err(Error::MismatchedInputs(format!(
            "{} assignments for {m} responses",
            result.assigned.len()
        )));
    }
    if result.counts.len() != l || result.per_label_mean.len() != l || result.per_label_std.len() != l {
        return Err(Error::MismatchedInputs(format!("label tables do not have {l} entries")));
    }
    if let Some(&bad) = result.assigned.iter().find(|&&j| j >= l) {
        return Err(Error::MismatchedInputs(format!("label index {bad} out of range")));
    }
    Ok((0..l)
        .map(|j| LabelStat {
            label: j,
            count: result.counts[j],
            mean: result.per_label_mean[j],
            std: result.per_label_std[j],
        })
        .collect())
}

/// Responses whose winning similarity is below [`LOW_SIMILARITY_FLAG`].
pub fn low_similarity_rows(matrix: &AssignmentMatrix, result: &AssignmentResult) -> Vec<usize> {
    result
        .assigned
        .iter()
        .enumerate()
        .filter(|&(i, &j)| matrix.get(i, j) < LOW_SIMILARITY_FLAG)
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(v: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn orthonormal_basis() {
        let a = build_assignment_matrix(&[ev(&[1.0, 0.0])], &[ev(&[1.0, 0.0]), ev(&[0.0, 1.0])]).unwrap();
        assert_eq!(a.to_rows(), vec![vec![1.0, 0.0]]);
        let r = assign_labels(&a);
        assert_eq!(r.assigned, vec![0]);
        assert_eq!(r.counts, vec![1, 0]);
        assert_eq!(r.per_label_mean, vec![Some(1.0), None]);
    }

    #[test]
    fn label_scaling_leaves_rows_unchanged() {
        let resp = [ev(&[0.3, -1.2, 2.0]), ev(&[1.0, 1.0, 0.5])];
        let labels = [ev(&[1.0, 2.0, 3.0]), ev(&[-1.0, 0.0, 0.4])];
        let scaled = [labels[0].scaled(2.0), labels[1].clone()];
        let a = build_assignment_matrix(&resp, &labels).unwrap();
        let b = build_assignment_matrix(&resp, &scaled).unwrap();
        for (x, y) in a.to_rows().concat().iter().zip(b.to_rows().concat()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_tie_goes_to_first_label() {
        let a = build_assignment_matrix(&[ev(&[1.0, 1.0])], &[ev(&[1.0, 0.0]), ev(&[0.0, 1.0])]).unwrap();
        assert!((a.get(0, 0) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-8);
        assert_eq!(a.get(0, 0), a.get(0, 1));
        assert_eq!(assign_labels(&a).assigned, vec![0]);
    }

    #[test]
    fn matrix_errors() {
        assert!(matches!(
            build_assignment_matrix(&[], &[ev(&[1.0])]),
            Err(Error::EmptyInput)
        ));
        assert!(matches!(
            build_assignment_matrix(&[ev(&[1.0, 0.0])], &[ev(&[0.0, 0.0])]),
            Err(Error::ZeroVector)
        ));
        assert!(matches!(
            build_assignment_matrix(&[ev(&[1.0, 0.0])], &[ev(&[1.0])]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn stats_examples() {
        let single = AssignmentMatrix::from_rows(vec![vec![0.8]]).unwrap();
        let r = assign_labels(&single);
        let t = label_similarity_stats(&single, &r).unwrap();
        assert_eq!(t[0].mean, Some(0.8));
        assert_eq!(t[0].std, Some(0.0));

        let pair = AssignmentMatrix::from_rows(vec![vec![0.6, 0.1], vec![0.8, 0.2]]).unwrap();
        let r = assign_labels(&pair);
        let t = label_similarity_stats(&pair, &r).unwrap();
        assert!((t[0].mean.unwrap() - 0.7).abs() < 1e-12);
        assert!((t[0].std.unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(t[1].count, 0);
        assert_eq!(t[1].mean, None);
        assert_eq!(t[1].std, None);
    }

    #[test]
    fn stats_reject_foreign_result() {
        let a = AssignmentMatrix::from_rows(vec![vec![0.6, 0.1], vec![0.8, 0.2]]).unwrap();
        let b = AssignmentMatrix::from_rows(vec![vec![0.6, 0.1, 0.0]]).unwrap();
        assert!(matches!(
            label_similarity_stats(&a, &assign_labels(&b)),
            Err(Error::MismatchedInputs(_))
        ));
    }

    #[test]
    fn flags_low_similarity() {
        let a = AssignmentMatrix::from_rows(vec![vec![0.05, -0.2], vec![0.9, 0.1]]).unwrap();
        assert_eq!(low_similarity_rows(&a, &assign_labels(&a)), vec![0]);
    }

    fn instance() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        (2usize..6, 1usize..10, 1usize..6).prop_flat_map(|(d, m, l)| {
            let v = prop::collection::vec(prop_oneof![-5.0f64..-0.1, 0.1f64..5.0], d);
            (prop::collection::vec(v.clone(), m), prop::collection::vec(v, l))
        })
    }

    proptest! {
        #[test]
        fn assignment_properties((resp, labels) in instance(), alpha in 1e-3f64..1e3) {
            let resp: Vec<_> = resp.iter().map(|v| ev(v)).collect();
            let labels: Vec<_> = labels.iter().map(|v| ev(v)).collect();
            let a = build_assignment_matrix(&resp, &labels).unwrap();
            let r = assign_labels(&a);
            prop_assert_eq!(r.counts.iter().sum::<usize>(), resp.len());
            for (i, &j) in r.assigned.iter().enumerate() {
                prop_assert!(j < labels.len());
                for jj in 0..labels.len() {
                    prop_assert!(a.get(i, j) >= a.get(i, jj));
                }
            }
            let resp2: Vec<_> = resp.iter().map(|v| v.scaled(alpha)).collect();
            let labels2: Vec<_> = labels.iter().map(|v| v.scaled(alpha)).collect();
            let r2 = assign_labels(&build_assignment_matrix(&resp2, &labels2).unwrap());
            prop_assert_eq!(r.assigned, r2.assigned);
        }
    }
}
