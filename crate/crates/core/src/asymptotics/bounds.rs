//! Extremes of `B + θA` over probability vectors.

use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::math::{exp, ln, PI};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundMode {
    /// Infimum over the open simplex.
    Min,
    /// Supremum over `{ε <= p_1 <= ... <= p_N, Σ p = 1}`.
    Max,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Convergence tolerance on the objective change per step.
    pub tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig { restarts: 64, seed: 0, max_iter: 200_000, tol: 1e-10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterBound {
    pub value: f64,
    pub p: Vec<f64>,
}

/// `-((N-1)/2) log 2π - ½ Σ log p_i - θ Σ p_i log p_i`
pub fn cluster_objective(theta: f64, p: &[f64]) -> f64 {
    let n = p.len() as f64;
    -0.5 * (n - 1.0) * ln(2.0 * PI)
        - p.iter().map(|&x| 0.5 * ln(x) + theta * x * ln(x)).sum::<f64>()
}

fn gradient(theta: f64, p: &[f64]) -> Vec<f64> {
    p.iter().map(|&x| -0.5 / x - theta * (ln(x) + 1.0)).collect()
}

pub fn cluster_bound(theta: f64, n: usize, mode: BoundMode, eps: Option<f64>) -> Result<ClusterBound> {
    cluster_bound_with(theta, n, mode, eps, &OptimizerConfig::default())
}

pub fn cluster_bound_with(
    theta: f64,
    n: usize,
    mode: BoundMode,
    eps: Option<f64>,
    cfg: &OptimizerConfig,
) -> Result<ClusterBound> {
    if n < 2 {
        return Err(Error::InvalidArgument("need N >= 2".into()));
    }
    let eps = match (mode, eps) {
        (BoundMode::Max, Some(e)) if e > 0.0 && e * n as f64 <= 1.0 => e,
        (BoundMode::Max, _) => {
            return Err(Error::InvalidArgument("max mode needs 0 < eps <= 1/N".into()))
        }
        (BoundMode::Min, _) => 0.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<ClusterBound> = None;
    for _ in 0..cfg.restarts {
        let run = match mode {
            BoundMode::Min => {
                let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
                minimize_softmax(theta, z, cfg)
            }
            BoundMode::Max => {
                let y: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
                maximize_ordered(theta, &y, eps, cfg)
            }
        };
        let Some(run) = run else { continue };
        let better = match &best {
            None => true,
            Some(b) => {
                let ord = match mode {
                    BoundMode::Min => run.value.partial_cmp(&b.value),
                    BoundMode::Max => b.value.partial_cmp(&run.value),
                };
                match ord {
                    Some(Ordering::Less) => true,
                    Some(Ordering::Equal) => lex_less(&run.p, &b.p),
                    _ => false,
                }
            }
        };
        if better {
            best = Some(run);
        }
    }
    best.ok_or(Error::DidNotConverge)
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).find(|(x, y)| x != y).is_some_and(|(x, y)| x < y)
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|&x| exp(x - m)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Gradient descent in softmax coordinates with backtracking.
fn minimize_softmax(theta: f64, mut z: Vec<f64>, cfg: &OptimizerConfig) -> Option<ClusterBound> {
    let mut p = softmax(&z);
    let mut f = cluster_objective(theta, &p);
    let mut step = 1.0;
    for _ in 0..cfg.max_iter {
        let g = gradient(theta, &p);
        let mean: f64 = p.iter().zip(&g).map(|(pi, gi)| pi * gi).sum();
        let gz: Vec<f64> = p.iter().zip(&g).map(|(pi, gi)| pi * (gi - mean)).collect();
        let norm2: f64 = gz.iter().map(|x| x * x).sum();
        if norm2 < 1e-26 {
            return Some(ClusterBound { value: f, p });
        }
        loop {
            let trial: Vec<f64> = z.iter().zip(&gz).map(|(zi, gi)| zi - step * gi).collect();
            let tp = softmax(&trial);
            let tf = cluster_objective(theta, &tp);
            if tf.is_finite() && tf <= f - 0.5 * step * norm2 {
                let done = f - tf < cfg.tol * 1e-3 && norm2 < cfg.tol;
                z = trial;
                p = tp;
                f = tf;
                step *= 2.0;
                if done {
                    return Some(ClusterBound { value: f, p });
                }
                break;
            }
            step *= 0.5;
            if step < 1e-300 {
                return Some(ClusterBound { value: f, p });
            }
        }
    }
    None
}

/// Euclidean projection onto `{eps <= p_1 <= ... <= p_N, Σ p = 1}`: for a
/// shift `τ`, clipping the isotonic regression of `y - τ` at `eps` is the
/// projection onto the ordered, bounded set; `τ` is then fixed by
/// bisection on the sum.
pub(crate) fn project_ordered(y: &[f64], eps: f64) -> Vec<f64> {
    let clipped = |tau: f64| -> Vec<f64> {
        let shifted: Vec<f64> = y.iter().map(|v| v - tau).collect();
        isotonic(&shifted).into_iter().map(|v| v.max(eps)).collect()
    };
    let sum = |tau: f64| clipped(tau).iter().sum::<f64>();
    let ymax = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ymin = y.iter().copied().fold(f64::INFINITY, f64::min);
    let mut lo = ymin - 1.0;
    let mut hi = ymax - eps + 1.0;
    while sum(lo) < 1.0 {
        lo -= 1.0 + (hi - lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sum(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut p = clipped(0.5 * (lo + hi));
    let s: f64 = p.iter().sum();
    let slack: f64 = p.iter().map(|&v| v - eps).sum();
    if slack > 0.0 {
        let f = (1.0 - eps * p.len() as f64) / slack;
        p.iter_mut().for_each(|v| *v = eps + (*v - eps) * f);
    } else {
        p.iter_mut().for_each(|v| *v /= s);
    }
    p
}

/// Pool-adjacent-violators: nondecreasing least-squares fit.
fn isotonic(y: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for &v in y {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (m2, c2) = blocks[blocks.len() - 1];
            let (m1, c1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let c = c1 + c2;
            *blocks.last_mut().expect("two blocks") = ((m1 * c1 as f64 + m2 * c2 as f64) / c as f64, c);
        }
    }
    blocks.into_iter().flat_map(|(m, c)| core::iter::repeat_n(m, c)).collect()
}

/// Projected gradient ascent with backtracking.
fn maximize_ordered(theta: f64, y: &[f64], eps: f64, cfg: &OptimizerConfig) -> Option<ClusterBound> {
    let mut p = project_ordered(y, eps);
    let mut f = cluster_objective(theta, &p);
    let mut step = 1e-3;
    for _ in 0..cfg.max_iter {
        let g = gradient(theta, &p);
        loop {
            let trial: Vec<f64> = p.iter().zip(&g).map(|(pi, gi)| pi + step * gi).collect();
            let tp = project_ordered(&trial, eps);
            let moved: f64 = tp.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum();
            let tf = cluster_objective(theta, &tp);
            if moved < 1e-30 {
                return Some(ClusterBound { value: f, p });
            }
            if tf >= f + moved / (2.0 * step) * 1e-4 {
                let done = tf - f < cfg.tol;
                p = tp;
                f = tf;
                step *= 2.0;
                if done {
                    return Some(ClusterBound { value: f, p });
                }
                break;
            }
            step *= 0.5;
            if step < 1e-300 {
                return Some(ClusterBound { value: f, p });
            }
        }
    }
    None
}
