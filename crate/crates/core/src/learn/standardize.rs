use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math::sqrt;
use crate::{Error, Result};

/// Per-feature centering and scaling to unit (population) variance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Result<Self> {
        let n = x.len();
        let p = x.first().map(Vec::len).ok_or(Error::InvalidArgument("empty design matrix".into()))?;
        check_width(x, p)?;
        let mut mean = alloc::vec![0.0; p];
        for row in x {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let mut var = alloc::vec![0.0; p];
        for row in x {
            for j in 0..p {
                let d = row[j] - mean[j];
                var[j] += d * d;
            }
        }
        let sd = var.into_iter().map(|v| sqrt(v / n as f64)).collect();
        Ok(Standardizer { mean, sd })
    }

    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    pub fn apply_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.mean.len() {
            return Err(Error::FeatureLength { expected: self.mean.len(), got: row.len() });
        }
        Ok(row
            .iter()
            .zip(self.mean.iter().zip(&self.sd))
            .map(|(&v, (&m, &s))| if s > 0.0 { (v - m) / s } else { 0.0 })
            .collect())
    }

    pub fn apply(&self, x: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        x.iter().map(|r| self.apply_row(r)).collect()
    }
}

pub(crate) fn check_width(x: &[Vec<f64>], p: usize) -> Result<()> {
    match x.iter().find(|r| r.len() != p) {
        Some(r) => Err(Error::FeatureLength { expected: p, got: r.len() }),
        None => Ok(()),
    }
}
