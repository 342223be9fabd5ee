//! Floating-point helpers shared by the numeric modules.

use alloc::vec::Vec;

pub use core::f64::consts::{LN_2, PI};

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `log(n!)` for `n` in `0..=max`, each entry an independent log-gamma
/// evaluation so the error does not accumulate along the table.
#[derive(Debug, Clone)]
pub struct LogFactorials {
    table: Vec<f64>,
}

impl LogFactorials {
    pub fn new(max: usize) -> Self {
        let table = (0..=max).map(|n| ln_gamma(n as f64 + 1.0)).collect();
        LogFactorials { table }
    }

    #[inline]
    pub fn get(&self, n: usize) -> f64 {
        self.table[n]
    }

    pub fn max(&self) -> usize {
        self.table.len() - 1
    }
}

/// Max-shifted `log(Σ exp(x_i))`; `-inf` for an empty input.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    let s: f64 = terms.iter().map(|&t| exp(t - m)).sum();
    m + ln(s)
}

/// Natural log of an arbitrary-precision unsigned integer, accurate to a few
/// ulps regardless of its size.
pub fn ln_biguint(n: &num_bigint::BigUint) -> f64 {
    use num_traits::ToPrimitive;
    let bits = n.bits();
    if bits <= 1000 {
        return ln(n.to_f64().unwrap_or(f64::INFINITY));
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap_or(f64::INFINITY);
    ln(top) + shift as f64 * LN_2
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let m = mean(xs);
    sqrt(xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64)
}
