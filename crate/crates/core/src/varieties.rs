//! Weight data for the two families: weighted projective spaces and toric
//! varieties of Picard rank two.

use alloc::format;
use alloc::vec::Vec;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::lattice::IntMatrix;
use crate::{Error, Result};

/// Sorted, well-formed weights `a_1 <= ... <= a_N` of a weighted projective
/// space of dimension `N - 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct WeightVector {
    weights: Vec<u64>,
}

impl WeightVector {
    pub fn validate_wps(raw: &[i64]) -> Result<Self> {
        if raw.is_empty() || raw.iter().any(|&x| x <= 0) {
            return Err(Error::NonPositiveWeight);
        }
        let mut weights: Vec<u64> = raw.iter().map(|&x| x as u64).collect();
        weights.sort_unstable();
        for i in 0..weights.len() {
            let g = weights
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold(0u64, |g, (_, &x)| g.gcd(&x));
            if g != 1 {
                return Err(Error::NotWellFormed(format!(
                    "gcd of the weights without a_{} is {g}",
                    i + 1
                )));
            }
        }
        Ok(WeightVector { weights })
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `a = a_1 + ... + a_N`
    pub fn total(&self) -> u64 {
        self.weights.iter().sum()
    }

    pub fn dimension(&self) -> usize {
        self.weights.len() - 1
    }
}

impl TryFrom<Vec<i64>> for WeightVector {
    type Error = Error;

    fn try_from(v: Vec<i64>) -> Result<Self> {
        WeightVector::validate_wps(&v)
    }
}

impl From<WeightVector> for Vec<i64> {
    fn from(w: WeightVector) -> Self {
        w.weights.iter().map(|&x| x as i64).collect()
    }
}

/// A `2 x N` non-negative weight matrix with columns `(a_i, b_i)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[Vec<i64>; 2]", into = "[Vec<i64>; 2]")]
pub struct WeightMatrix {
    top: Vec<i64>,
    bottom: Vec<i64>,
}

impl WeightMatrix {
    /// Validated rank-two weight matrix of dimension at least two on each
    /// side of the split.
    pub fn validate_rank2(top: &[i64], bottom: &[i64]) -> Result<Self> {
        let w = WeightMatrix::general(top, bottom)?;
        let (plus, minus) = (w.plus().len(), w.minus().len());
        if plus < 2 || minus < 2 {
            return Err(Error::SplitTooSmall { plus, minus });
        }
        Ok(w)
    }

    /// Lenient constructor: no zero column, no column parallel to `(a, b)`,
    /// and both `I+` and `I-` nonempty, so the period sum is finite.
    pub fn general(top: &[i64], bottom: &[i64]) -> Result<Self> {
        if top.len() != bottom.len() {
            return Err(Error::DimensionMismatch(format!(
                "rows of length {} and {}",
                top.len(),
                bottom.len()
            )));
        }
        if top.is_empty() {
            return Err(Error::EmptyMatrix);
        }
        if top.iter().chain(bottom).any(|&x| x < 0) {
            return Err(Error::InvalidArgument("negative weight-matrix entry".into()));
        }
        if top.iter().zip(bottom).any(|(&x, &y)| x == 0 && y == 0) {
            return Err(Error::ZeroColumn);
        }
        let w = WeightMatrix { top: top.to_vec(), bottom: bottom.to_vec() };
        if (0..w.len()).any(|i| w.cross(i) == 0) {
            return Err(Error::ParallelColumn);
        }
        let (plus, minus) = (w.plus().len(), w.minus().len());
        if plus == 0 || minus == 0 {
            return Err(Error::SplitTooSmall { plus, minus });
        }
        Ok(w)
    }

    pub fn len(&self) -> usize {
        self.top.len()
    }

    pub fn is_empty(&self) -> bool {
        self.top.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.len() - 2
    }

    pub fn top(&self) -> &[i64] {
        &self.top
    }

    pub fn bottom(&self) -> &[i64] {
        &self.bottom
    }

    pub fn column(&self, i: usize) -> (i64, i64) {
        (self.top[i], self.bottom[i])
    }

    pub fn a(&self) -> i64 {
        self.top.iter().sum()
    }

    pub fn b(&self) -> i64 {
        self.bottom.iter().sum()
    }

    /// `gcd(a, b)`
    pub fn ell(&self) -> i64 {
        self.a().gcd(&self.b())
    }

    /// `a * b_i - b * a_i`
    pub fn cross(&self, i: usize) -> i128 {
        self.a() as i128 * self.bottom[i] as i128 - self.b() as i128 * self.top[i] as i128
    }

    /// Indices (0-based) with `a * b_i - b * a_i > 0`.
    pub fn plus(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.cross(i) > 0).collect()
    }

    /// Indices (0-based) with `a * b_i - b * a_i < 0`.
    pub fn minus(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.cross(i) < 0).collect()
    }

    pub fn to_int_matrix(&self) -> IntMatrix {
        IntMatrix::from_rows(&[&self.top, &self.bottom]).expect("non-empty")
    }

    pub fn cone(&self) -> ConeC {
        ConeC {
            constraints: self.top.iter().copied().zip(self.bottom.iter().copied()).collect(),
        }
    }

    /// Same variety with columns permuted: `new column j = old column perm[j]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        let top: Vec<i64> = perm.iter().map(|&i| self.top[i]).collect();
        let bottom: Vec<i64> = perm.iter().map(|&i| self.bottom[i]).collect();
        WeightMatrix::general(&top, &bottom)
    }
}

impl TryFrom<[Vec<i64>; 2]> for WeightMatrix {
    type Error = Error;

    fn try_from([top, bottom]: [Vec<i64>; 2]) -> Result<Self> {
        WeightMatrix::general(&top, &bottom)
    }
}

impl From<WeightMatrix> for [Vec<i64>; 2] {
    fn from(w: WeightMatrix) -> Self {
        [w.top, w.bottom]
    }
}

/// The cone `{(x, y) : a_i x + b_i y >= 0 for all i}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeC {
    constraints: Vec<(i64, i64)>,
}

impl ConeC {
    pub fn contains(&self, x: i128, y: i128) -> bool {
        self.constraints.iter().all(|&(a, b)| a as i128 * x + b as i128 * y >= 0)
    }

    /// The two boundary rays, lower angle first: `(b_j, -a_j)` for the
    /// steepest column and `(-b_m, a_m)` for the flattest.
    pub fn extreme_rays(&self) -> [(i64, i64); 2] {
        let steepest = self
            .constraints
            .iter()
            .copied()
            .max_by(|&(a1, b1), &(a2, b2)| (b1 as i128 * a2 as i128).cmp(&(b2 as i128 * a1 as i128)))
            .expect("non-empty");
        let flattest = self
            .constraints
            .iter()
            .copied()
            .min_by(|&(a1, b1), &(a2, b2)| (b1 as i128 * a2 as i128).cmp(&(b2 as i128 * a1 as i128)))
            .expect("non-empty");
        [(steepest.1, -steepest.0), (-flattest.1, flattest.0)]
    }
}

/// All `(k, l)` in the cone with `a k + b l = d`, ascending in `k`.
pub fn rank2_line_points(w: &WeightMatrix, d: u64) -> Vec<(i64, i64)> {
    let (a, b) = (w.a() as i128, w.b() as i128);
    let d = d as i128;
    let e = a.extended_gcd(&b);
    let g = e.gcd;
    if d % g != 0 {
        return Vec::new();
    }
    let (k0, l0) = (e.x * (d / g), e.y * (d / g));
    // (k, l) = (k0 + t b/g, l0 - t a/g); constraint i reads t * cross_i/g <= c_i
    let mut lo = i128::MIN;
    let mut hi = i128::MAX;
    for i in 0..w.len() {
        let (ai, bi) = w.column(i);
        let c = ai as i128 * k0 + bi as i128 * l0;
        let s = w.cross(i) / g;
        if s > 0 {
            hi = hi.min(Integer::div_floor(&c, &s));
        } else {
            lo = lo.max(Integer::div_ceil(&c, &s));
        }
    }
    if lo > hi {
        return Vec::new();
    }
    (lo..=hi)
        .map(|t| ((k0 + t * (b / g)) as i64, (l0 - t * (a / g)) as i64))
        .collect()
}
