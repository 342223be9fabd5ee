use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    /// Labels indexing the confusion matrices.
    pub classes: Vec<usize>,
    /// Counts, rows = true class, columns = predicted class.
    pub confusion: Vec<Vec<usize>>,
    /// Each nonempty row sums to one.
    pub normalized_by_true: Vec<Vec<f64>>,
    /// Each nonempty column sums to one.
    pub normalized_by_pred: Vec<Vec<f64>>,
    pub split_seed: Option<u64>,
}

pub fn evaluate_predictions(truth: &[usize], pred: &[usize], split_seed: Option<u64>) -> Result<EvalReport> {
    if truth.len() != pred.len() {
        return Err(Error::DimensionMismatch("truth and prediction lengths differ".into()));
    }
    let mut classes: Vec<usize> = truth.iter().chain(pred).copied().collect();
    classes.sort_unstable();
    classes.dedup();
    let k = classes.len();
    let idx = |c: usize| classes.binary_search(&c).expect("collected");
    let mut confusion = alloc::vec![alloc::vec![0usize; k]; k];
    for (&t, &p) in truth.iter().zip(pred) {
        confusion[idx(t)][idx(p)] += 1;
    }
    let correct: usize = (0..k).map(|i| confusion[i][i]).sum();
    let accuracy = if truth.is_empty() { 0.0 } else { correct as f64 / truth.len() as f64 };
    let normalized_by_true = confusion
        .iter()
        .map(|row| {
            let s: usize = row.iter().sum();
            row.iter().map(|&c| if s > 0 { c as f64 / s as f64 } else { 0.0 }).collect()
        })
        .collect();
    let col_sums: Vec<usize> = (0..k).map(|j| confusion.iter().map(|r| r[j]).sum()).collect();
    let normalized_by_pred = confusion
        .iter()
        .map(|row| {
            row.iter()
                .zip(&col_sums)
                .map(|(&c, &s)| if s > 0 { c as f64 / s as f64 } else { 0.0 })
                .collect()
        })
        .collect();
    Ok(EvalReport { accuracy, classes, confusion, normalized_by_true, normalized_by_pred, split_seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_and_constant() {
        let r = evaluate_predictions(&[1, 2, 3], &[1, 2, 3], None).unwrap();
        assert_eq!(r.accuracy, 1.0);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(r.normalized_by_true[i][j], if i == j { 1.0 } else { 0.0 });
            }
        }
        let r = evaluate_predictions(&[0, 0, 1, 1], &[0, 0, 0, 0], Some(7)).unwrap();
        assert_eq!(r.accuracy, 0.5);
        assert_eq!(r.normalized_by_pred[0][0], 0.5);
        assert_eq!(r.normalized_by_true[1][0], 1.0);
    }
}
