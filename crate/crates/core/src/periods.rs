//! Regularized quantum period coefficients `c_d`, exactly or as `log c_d`.

use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::math::{log_sum_exp, LogFactorials};
use crate::varieties::{rank2_line_points, WeightMatrix, WeightVector};
use crate::{Error, Result};

/// Marks `c_d = 0` in a log-coefficient array.
pub const ZERO_COEFF: f64 = f64::NEG_INFINITY;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Wps,
    Rank2,
}

/// `log c_d` for `d = 0..=d_max`, with [`ZERO_COEFF`] where `c_d = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodSequence {
    family: Family,
    divisor: u64,
    log_coeffs: Vec<f64>,
}

impl PeriodSequence {
    pub fn family(&self) -> Family {
        self.family
    }

    /// `c_d = 0` unless the divisor divides `d`.
    pub fn divisor(&self) -> u64 {
        self.divisor
    }

    pub fn d_max(&self) -> usize {
        self.log_coeffs.len() - 1
    }

    pub fn log_coeffs(&self) -> &[f64] {
        &self.log_coeffs
    }

    /// `log c_d`, or `None` when `c_d = 0` or `d > d_max`.
    pub fn get(&self, d: usize) -> Option<f64> {
        self.log_coeffs.get(d).copied().filter(|&x| x != ZERO_COEFF)
    }

    /// Smallest `d' >= d` with `c_{d'} != 0`.
    pub fn next_nonzero_index(&self, d: usize) -> Result<usize> {
        (d..self.log_coeffs.len())
            .find(|&i| self.log_coeffs[i] != ZERO_COEFF)
            .ok_or(Error::Exhausted)
    }

    /// `(d, log c_d)` over nonzero coefficients with `lo <= d <= hi`.
    pub fn nonzero_points(&self, lo: usize, hi: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let hi = hi.min(self.d_max());
        (lo..=hi).filter_map(move |d| self.get(d).map(|y| (d, y)))
    }
}

/// Exact coefficients `c_0..=c_m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactPrefix {
    coeffs: Vec<BigUint>,
}

impl ExactPrefix {
    pub fn coeffs(&self) -> &[BigUint] {
        &self.coeffs
    }

    pub fn get(&self, d: usize) -> Option<&BigUint> {
        self.coeffs.get(d)
    }

    pub fn d_max(&self) -> usize {
        self.coeffs.len() - 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Log,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Coefficients {
    Exact(ExactPrefix),
    Log(PeriodSequence),
}

pub fn wps_coeffs(w: &WeightVector, d_max: usize, mode: Mode) -> Coefficients {
    match mode {
        Mode::Exact => Coefficients::Exact(wps_exact_coeffs(w, d_max)),
        Mode::Log => Coefficients::Log(wps_log_coeffs(w, d_max)),
    }
}

pub fn rank2_coeffs(w: &WeightMatrix, d_max: usize, mode: Mode) -> Coefficients {
    match mode {
        Mode::Exact => Coefficients::Exact(rank2_exact_coeffs(w, d_max)),
        Mode::Log => Coefficients::Log(rank2_log_coeffs(w, d_max)),
    }
}

/// `log c_{ka} = log (ak)! - Σ log (a_i k)!`
pub fn wps_log_coeffs(w: &WeightVector, d_max: usize) -> PeriodSequence {
    let lf = LogFactorials::new(d_max);
    let a = w.total() as usize;
    let mut log_coeffs = alloc::vec![ZERO_COEFF; d_max + 1];
    for k in 0..=d_max / a {
        log_coeffs[a * k] =
            lf.get(a * k) - w.weights().iter().map(|&ai| lf.get(ai as usize * k)).sum::<f64>();
    }
    PeriodSequence { family: Family::Wps, divisor: a as u64, log_coeffs }
}

fn factorials(max: usize) -> Vec<BigUint> {
    let mut f = Vec::with_capacity(max + 1);
    f.push(BigUint::one());
    for n in 1..=max {
        let next = &f[n - 1] * BigUint::from(n);
        f.push(next);
    }
    f
}

pub fn wps_exact_coeffs(w: &WeightVector, d_max: usize) -> ExactPrefix {
    let fact = factorials(d_max);
    let a = w.total() as usize;
    let mut coeffs = alloc::vec![BigUint::zero(); d_max + 1];
    for k in 0..=d_max / a {
        let den: BigUint = w.weights().iter().map(|&ai| &fact[ai as usize * k]).product();
        coeffs[a * k] = &fact[a * k] / den;
    }
    ExactPrefix { coeffs }
}

fn line_degrees(w: &WeightMatrix, k: i64, l: i64) -> impl Iterator<Item = usize> + '_ {
    (0..w.len()).map(move |i| {
        let (ai, bi) = w.column(i);
        (ai * k + bi * l) as usize
    })
}

/// Sum over cone points on the line `ak + bl = d` of
/// `(ak + bl)! / Π (a_i k + b_i l)!`, accumulated in log space in ascending
/// `k` order.
pub fn rank2_log_coeffs(w: &WeightMatrix, d_max: usize) -> PeriodSequence {
    let lf = LogFactorials::new(d_max);
    let mut log_coeffs = alloc::vec![ZERO_COEFF; d_max + 1];
    let mut terms = Vec::new();
    for (d, slot) in log_coeffs.iter_mut().enumerate() {
        terms.clear();
        for (k, l) in rank2_line_points(w, d as u64) {
            terms.push(lf.get(d) - line_degrees(w, k, l).map(|m| lf.get(m)).sum::<f64>());
        }
        if !terms.is_empty() {
            *slot = log_sum_exp(&terms);
        }
    }
    PeriodSequence { family: Family::Rank2, divisor: w.ell() as u64, log_coeffs }
}

pub fn rank2_exact_coeffs(w: &WeightMatrix, d_max: usize) -> ExactPrefix {
    let fact = factorials(d_max);
    let coeffs = (0..=d_max)
        .map(|d| {
            rank2_line_points(w, d as u64)
                .into_iter()
                .map(|(k, l)| {
                    let den: BigUint = line_degrees(w, k, l).map(|m| &fact[m]).product();
                    &fact[d] / den
                })
                .sum()
        })
        .collect();
    ExactPrefix { coeffs }
}
