//! Linear fits to `(d, log c_d)` and classifier feature vectors.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math::sqrt;
use crate::periods::PeriodSequence;
use crate::{Error, Result};

/// Full-scale `s_int` cut for rank-two data fitted on `1000..=20000`.
pub const S_INT_THRESHOLD: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub lo: usize,
    pub hi: usize,
    pub stride: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub se_slope: f64,
    pub se_intercept: f64,
    pub n_points: usize,
    pub window: Option<Window>,
}

/// Least squares line with standard errors from the unbiased residual
/// variance.
pub fn ols_fit(points: &[(f64, f64)]) -> Result<LinearFit> {
    let n = points.len();
    if n < 3 {
        return Err(Error::TooFewPoints(n));
    }
    let nf = n as f64;
    let xbar = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let ybar = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in points {
        sxx += (x - xbar) * (x - xbar);
        sxy += (x - xbar) * (y - ybar);
    }
    if !(sxx > 0.0) {
        return Err(Error::DegenerateDesign);
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let rss: f64 = points
        .iter()
        .map(|&(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let s2 = rss / (nf - 2.0);
    Ok(LinearFit {
        slope,
        intercept,
        se_slope: sqrt(s2 / sxx),
        se_intercept: sqrt(s2 * (1.0 / nf + xbar * xbar / sxx)),
        n_points: n,
        window: None,
    })
}

/// Which `(d, log c_d)` pairs enter the fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplingPolicy {
    /// Every nonzero coefficient with `min_degree <= d <= d_max`.
    AllNonzero { min_degree: usize },
    /// For each `d` on the grid `lo, lo + stride, ..., <= hi`, the next
    /// nonzero coefficient at or after `d`; repeated indices collapse.
    NextNonzero(Window),
}

impl SamplingPolicy {
    /// Weighted projective spaces: all nonzero terms, `c_0` excluded.
    pub const WPS: SamplingPolicy = SamplingPolicy::AllNonzero { min_degree: 1 };
    pub const RANK2_FULL: SamplingPolicy =
        SamplingPolicy::NextNonzero(Window { lo: 1000, hi: 20_000, stride: 100 });
    pub const RANK2_DESK: SamplingPolicy =
        SamplingPolicy::NextNonzero(Window { lo: 500, hi: 5000, stride: 50 });

    pub fn window(&self) -> Option<Window> {
        match self {
            SamplingPolicy::AllNonzero { .. } => None,
            SamplingPolicy::NextNonzero(w) => Some(*w),
        }
    }
}

/// The degrees a policy samples from a sequence.
pub fn sample_degrees(seq: &PeriodSequence, policy: &SamplingPolicy) -> Result<Vec<usize>> {
    match *policy {
        SamplingPolicy::AllNonzero { min_degree } => {
            Ok(seq.nonzero_points(min_degree, seq.d_max()).map(|(d, _)| d).collect())
        }
        SamplingPolicy::NextNonzero(w) => {
            if w.stride == 0 || w.lo > w.hi {
                return Err(Error::InvalidArgument("window needs lo <= hi and stride > 0".into()));
            }
            let mut ds: Vec<usize> = Vec::new();
            for d in (w.lo..=w.hi).step_by(w.stride) {
                match seq.next_nonzero_index(d) {
                    Ok(i) => {
                        if ds.last() != Some(&i) {
                            ds.push(i);
                        }
                    }
                    Err(Error::Exhausted) => break,
                    Err(e) => return Err(e),
                }
            }
            Ok(ds)
        }
    }
}

pub fn extract_features(seq: &PeriodSequence, policy: &SamplingPolicy) -> Result<LinearFit> {
    let points: Vec<(f64, f64)> = sample_degrees(seq, policy)?
        .into_iter()
        .map(|d| (d as f64, seq.get(d).expect("nonzero by construction")))
        .collect();
    let mut fit = ols_fit(&points)?;
    fit.window = policy.window();
    Ok(fit)
}

/// `s_int < threshold`
pub fn passes_s_int(fit: &LinearFit, threshold: f64) -> bool {
    fit.se_intercept < threshold
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub label: usize,
}

pub fn feature_vector_2(fit: &LinearFit, label: usize) -> FeatureVector {
    FeatureVector { values: alloc::vec![fit.slope, fit.intercept], label }
}

/// `[slope, intercept, v_1..v_100]` with `v_d = log c_d`, or 0 when `c_d = 0`.
pub fn feature_vector_102(seq: &PeriodSequence, fit: &LinearFit, label: usize) -> Result<FeatureVector> {
    if seq.d_max() < 100 {
        return Err(Error::InvalidArgument("need coefficients up to d = 100".into()));
    }
    let mut values = alloc::vec![fit.slope, fit.intercept];
    values.extend(log_prefix(seq));
    Ok(FeatureVector { values, label })
}

/// `log c_d` for `d = 1..=100`, zero coefficients as 0.0.
pub fn log_prefix(seq: &PeriodSequence) -> Vec<f64> {
    (1..=100).map(|d| seq.get(d).unwrap_or(0.0)).collect()
}
