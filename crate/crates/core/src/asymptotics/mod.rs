//! Closed-form growth constants `A`, `B` of `log c_d ~ A d - (dim/2) log d + B`,
//! the optimal direction for rank-two varieties, and the Gaussian data
//! behind the asymptotics.

mod bounds;

pub use bounds::{cluster_bound, cluster_bound_with, cluster_objective, BoundMode, ClusterBound, OptimizerConfig};

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::math::{exp, ln, ln_gamma, sqrt, PI};
use crate::periods::PeriodSequence;
use crate::varieties::{WeightMatrix, WeightVector};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticData {
    pub p: Vec<f64>,
    /// Growth rate in nats per degree.
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    /// Gaussian width, rank two only.
    pub theta: Option<f64>,
    /// Optimal direction `(mu, nu)`, rank two only.
    pub direction: Option<(f64, f64)>,
    pub dim: usize,
}

fn entropy(p: &[f64]) -> f64 {
    -p.iter().map(|&x| x * ln(x)).sum::<f64>()
}

fn base_offset(p: &[f64], dim: usize) -> f64 {
    -(dim as f64 / 2.0) * ln(2.0 * PI) - 0.5 * p.iter().map(|&x| ln(x)).sum::<f64>()
}

pub fn wps_asymptotics(w: &WeightVector) -> AsymptoticData {
    let a = w.total() as f64;
    let p: Vec<f64> = w.weights().iter().map(|&x| x as f64 / a).collect();
    AsymptoticData {
        a: entropy(&p),
        b: base_offset(&p, w.dimension()),
        p,
        theta: None,
        direction: None,
        dim: w.dimension(),
    }
}

fn direction_residual(w: &WeightMatrix, x: f64, y: f64) -> f64 {
    (0..w.len())
        .map(|i| {
            let (ai, bi) = w.column(i);
            -(w.cross(i) as f64) * ln(ai as f64 * x + bi as f64 * y)
        })
        .sum()
}

/// `f(mu, nu) = Σ (a_i b - b_i a) log(a_i mu + b_i nu)` at a direction.
pub fn rank2_direction_residual(w: &WeightMatrix, dir: (f64, f64)) -> f64 {
    direction_residual(w, dir.0, dir.1)
}

/// Root of `f` inside the cone `C`, found by bisection along the segment
/// between the two boundary rays of `C`. Normalized to `mu + nu = 1`; in
/// the rare case where the root points away from the first quadrant far
/// enough that `mu + nu <= 0`, it is normalized to unit length instead.
pub fn rank2_direction(w: &WeightMatrix) -> Result<(f64, f64)> {
    let [r1, r2] = w.cone().extreme_rays();
    let at = |t: f64| {
        let x = (1.0 - t) * r1.0 as f64 + t * r2.0 as f64;
        let y = (1.0 - t) * r1.1 as f64 + t * r2.1 as f64;
        (x, y)
    };
    let f = |t: f64| {
        let (x, y) = at(t);
        direction_residual(w, x, y)
    };
    let (mut lo, mut hi) = (1e-12, 1.0 - 1e-12);
    let (f_lo, f_hi) = (f(lo), f(hi));
    if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo.signum() == f_hi.signum() {
        return Err(Error::NoInteriorRoot);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid).signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (x, y) = at(0.5 * (lo + hi));
    let s = x + y;
    if s > 0.0 {
        Ok((x / s, y / s))
    } else {
        let n = sqrt(x * x + y * y);
        Ok((x / n, y / n))
    }
}

pub fn rank2_asymptotics(w: &WeightMatrix) -> Result<AsymptoticData> {
    let (mu, nu) = rank2_direction(w)?;
    let total = w.a() as f64 * mu + w.b() as f64 * nu;
    let p: Vec<f64> = (0..w.len())
        .map(|i| {
            let (ai, bi) = w.column(i);
            (ai as f64 * mu + bi as f64 * nu) / total
        })
        .collect();
    if p.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::NoInteriorRoot);
    }
    let ell = w.ell() as f64;
    let theta: f64 = (0..w.len())
        .map(|i| {
            let c = w.cross(i) as f64;
            c * c / (ell * ell * p[i])
        })
        .sum();
    Ok(AsymptoticData {
        a: entropy(&p),
        b: base_offset(&p, w.dimension()) - 0.5 * ln(theta),
        p,
        theta: Some(theta),
        direction: Some((mu, nu)),
        dim: w.dimension(),
    })
}

/// `A d - (dim/2) log d + B`
pub fn predicted_log_coeff(asy: &AsymptoticData, d: u64) -> f64 {
    asy.a * d as f64 - (asy.dim as f64 / 2.0) * ln(d as f64) + asy.b
}

/// `log c_d - predicted_log_coeff(d)` for each listed degree.
pub fn residual_series(seq: &PeriodSequence, asy: &AsymptoticData, ds: &[usize]) -> Result<Vec<f64>> {
    ds.iter()
        .map(|&d| {
            let y = seq.get(d).ok_or(Error::ZeroCoefficient(d))?;
            Ok(y - predicted_log_coeff(asy, d as u64))
        })
        .collect()
}

/// Gaussian approximation of the summands of the rank-two period around
/// the constrained minimizer at degree `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianApprox {
    pub x_star: [f64; 2],
    /// `Σ (1/p_i) α_i^T α_i` with `α_i = (a_i, b_i)`.
    pub quad_form: [[f64; 2]; 2],
    /// Component of `Σ α_i log(α_i · x*) + α` orthogonal to `α`; zero at
    /// an exact Lagrange point.
    pub lagrange_check: f64,
}

pub fn gaussian_approx(w: &WeightMatrix, asy: &AsymptoticData, d: f64) -> Result<GaussianApprox> {
    let (mu, nu) = asy.direction.ok_or(Error::InvalidArgument("not a rank-two asymptotic".into()))?;
    let (a, b) = (w.a() as f64, w.b() as f64);
    let scale = d / (a * mu + b * nu);
    let x_star = [mu * scale, nu * scale];
    let mut q = [[0.0; 2]; 2];
    let mut r = [a, b];
    for i in 0..w.len() {
        let (ai, bi) = w.column(i);
        let (ai, bi) = (ai as f64, bi as f64);
        let pi = asy.p[i];
        q[0][0] += ai * ai / pi;
        q[0][1] += ai * bi / pi;
        q[1][1] += bi * bi / pi;
        let l = ln(ai * x_star[0] + bi * x_star[1]);
        r[0] += ai * l;
        r[1] += bi * l;
    }
    q[1][0] = q[0][1];
    let lagrange_check = (r[0] * b - r[1] * a) / sqrt(a * a + b * b);
    Ok(GaussianApprox { x_star, quad_form: q, lagrange_check })
}

/// Ratio of the scaled multinomial probability to its Gaussian limit, in the
/// normalization of the local limit theorem.
pub fn local_clt_ratio(p: &[f64], d: u64, k: &[u64]) -> Result<f64> {
    if p.len() != k.len() || p.len() < 2 {
        return Err(Error::DimensionMismatch("p and k must have equal length >= 2".into()));
    }
    if k.iter().sum::<u64>() != d {
        return Err(Error::InvalidArgument("k must sum to d".into()));
    }
    if p.iter().any(|&x| !(x > 0.0 && x < 1.0)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::DegenerateProbabilities);
    }
    let n = p.len() as f64;
    let df = d as f64;
    let mut log_lhs = 0.5 * (n - 1.0) * ln(df) + ln_gamma(df + 1.0);
    let mut quad = 0.0;
    for (&pi, &ki) in p.iter().zip(k) {
        let kf = ki as f64;
        log_lhs += kf * ln(pi) - ln_gamma(kf + 1.0);
        let qi = 1.0 - pi;
        let xi = (kf - df * pi) / sqrt(df * pi * qi);
        quad += qi * xi * xi;
    }
    let log_rhs =
        -0.5 * quad - 0.5 * (n - 1.0) * ln(2.0 * PI) - 0.5 * p.iter().map(|&x| ln(x)).sum::<f64>();
    Ok(exp(log_lhs - log_rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::LN_2;

    fn wv(w: &[i64]) -> WeightVector {
        WeightVector::validate_wps(w).unwrap()
    }

    fn p1p1() -> WeightMatrix {
        WeightMatrix::validate_rank2(&[1, 1, 0, 0], &[0, 0, 1, 1]).unwrap()
    }

    fn outlier() -> WeightMatrix {
        WeightMatrix::validate_rank2(&[1, 10, 5, 13, 8, 12, 0], &[0, 0, 3, 8, 5, 14, 1]).unwrap()
    }

    #[test]
    fn wps_constants() {
        let s = wps_asymptotics(&wv(&[1, 1]));
        assert!((s.a - LN_2).abs() < 1e-15);
        assert!((s.b - (-0.5 * ln(2.0 * PI) + LN_2)).abs() < 1e-15);
        assert!((s.b + 0.225791).abs() < 1e-6);
        let s = wps_asymptotics(&wv(&[1, 1, 1]));
        assert!((s.a - 1.098612).abs() < 1e-6);
        assert!((s.b + 0.189959).abs() < 1e-6);
        let expected = 1.5 * LN_2 - 0.5 * ln(2.0 * PI) + LN_2;
        assert!((predicted_log_coeff(&wps_asymptotics(&wv(&[1, 1])), 2) - expected).abs() < 1e-12);
        assert!((expected - 0.813881).abs() < 1e-4);
    }

    #[test]
    fn p1xp1_constants() {
        let s = rank2_asymptotics(&p1p1()).unwrap();
        let (mu, nu) = s.direction.unwrap();
        assert!((mu - 0.5).abs() < 1e-12 && (nu - 0.5).abs() < 1e-12);
        assert!(s.p.iter().all(|&x| (x - 0.25).abs() < 1e-12));
        assert!((s.a - ln(4.0)).abs() < 1e-12);
        assert!((s.theta.unwrap() - 16.0).abs() < 1e-9);
        assert!((s.b - ln(2.0 / PI)).abs() < 1e-9);
    }

    #[test]
    fn outlier_root_and_slope() {
        let w = outlier();
        let dir = rank2_direction(&w).unwrap();
        assert!(rank2_direction_residual(&w, dir).abs() <= 1e-12);
        let s = rank2_asymptotics(&w).unwrap();
        assert!((s.a - 1.637).abs() < 0.002, "A = {}", s.a);
        assert!((s.p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let g = gaussian_approx(&w, &s, 1000.0).unwrap();
        assert!(g.lagrange_check.abs() < 1e-8);
        assert!(g.quad_form[0][0] > 0.0);
    }

    #[test]
    fn clt_ratio_examples() {
        let r = local_clt_ratio(&[0.5, 0.5], 100, &[50, 50]).unwrap();
        assert!((r - 0.99751).abs() < 1e-5, "{r}");
        // 2 * 4! / (4! 0!) / 16 against exp(-2) / (sqrt(2π) / 2)
        let r = local_clt_ratio(&[0.5, 0.5], 4, &[4, 0]).unwrap();
        let expected = 0.125 / (exp(-2.0) * 2.0 / libm::sqrt(2.0 * PI));
        assert!((r - expected).abs() < 1e-12 && r > 1.0);
        let t = 1.0 / 3.0;
        let r = local_clt_ratio(&[t, t, t], 3000, &[1000, 1000, 1000]).unwrap();
        assert!((r - 1.0).abs() < 0.01);
        assert_eq!(local_clt_ratio(&[1.0, 0.0], 2, &[2, 0]), Err(Error::DegenerateProbabilities));
    }
}
