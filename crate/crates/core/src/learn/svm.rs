use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{class_index, standardize::check_width};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Multiclass {
    /// One machine per class pair, majority vote.
    Ovo,
    /// One machine per class, largest margin wins.
    Ovr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SvmSolver {
    /// Dual coordinate descent; converges to the exact optimum.
    DualCoordinate,
    /// Primal stochastic subgradient steps with `1/(λt)` step size.
    Pegasos,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    /// Hinge-loss weight in `½|w|² + C Σ hinge`.
    pub c: f64,
    pub multiclass: Multiclass,
    pub solver: SvmSolver,
    pub max_epochs: usize,
    /// Dual coordinate descent stops once the projected-gradient spread
    /// falls below this.
    pub tol: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            multiclass: Multiclass::Ovo,
            solver: SvmSolver::DualCoordinate,
            max_epochs: 2000,
            tol: 1e-4,
        }
    }
}

/// `w · x + b`; the bias is learned as the weight of a constant feature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinarySvm {
    pub w: Vec<f64>,
    pub b: f64,
}

impl BinarySvm {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.b
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Machine {
    /// Class index scored positive.
    pub positive: usize,
    /// Class index scored negative; `None` means all other classes.
    pub negative: Option<usize>,
    pub svm: BinarySvm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub classes: Vec<usize>,
    pub multiclass: Multiclass,
    pub machines: Vec<Machine>,
}

fn train_binary(x: &[&[f64]], y: &[f64], cfg: &SvmConfig, rng: &mut ChaCha8Rng) -> BinarySvm {
    let p = x.first().map_or(0, |r| r.len());
    let n = x.len();
    let mut w = alloc::vec![0.0; p + 1];
    let dot = |w: &[f64], xi: &[f64]| w[..p].iter().zip(xi).map(|(a, b)| a * b).sum::<f64>() + w[p];
    let mut order: Vec<usize> = (0..n).collect();
    match cfg.solver {
        SvmSolver::DualCoordinate => {
            let qii: Vec<f64> = x.iter().map(|r| r.iter().map(|v| v * v).sum::<f64>() + 1.0).collect();
            let mut alpha = alloc::vec![0.0; n];
            for _ in 0..cfg.max_epochs {
                order.shuffle(rng);
                let (mut pg_max, mut pg_min) = (f64::NEG_INFINITY, f64::INFINITY);
                for &i in &order {
                    let g = y[i] * dot(&w, x[i]) - 1.0;
                    let pg = if alpha[i] == 0.0 {
                        g.min(0.0)
                    } else if alpha[i] == cfg.c {
                        g.max(0.0)
                    } else {
                        g
                    };
                    pg_max = pg_max.max(pg);
                    pg_min = pg_min.min(pg);
                    if pg != 0.0 {
                        let old = alpha[i];
                        alpha[i] = (old - g / qii[i]).clamp(0.0, cfg.c);
                        let step = (alpha[i] - old) * y[i];
                        for (wj, xj) in w.iter_mut().zip(x[i]) {
                            *wj += step * xj;
                        }
                        w[p] += step;
                    }
                }
                if pg_max - pg_min < cfg.tol {
                    break;
                }
            }
        }
        SvmSolver::Pegasos => {
            let lambda = 1.0 / (cfg.c * n as f64);
            let mut t = 0usize;
            for _ in 0..cfg.max_epochs {
                order.shuffle(rng);
                for &i in &order {
                    t += 1;
                    let eta = 1.0 / (lambda * t as f64);
                    let margin = y[i] * dot(&w, x[i]);
                    w.iter_mut().for_each(|v| *v *= 1.0 - eta * lambda);
                    if margin < 1.0 {
                        for (wj, xj) in w.iter_mut().zip(x[i]) {
                            *wj += eta * y[i] * xj;
                        }
                        w[p] += eta * y[i];
                    }
                }
            }
        }
    }
    let b = w.pop().expect("bias slot");
    BinarySvm { w, b }
}

pub fn svm_train(x: &[Vec<f64>], y: &[usize], cfg: &SvmConfig, seed: u64) -> Result<LinearSvm> {
    let (classes, yi) = class_index(x, y)?;
    check_width(x, x[0].len())?;
    if !(cfg.c > 0.0) {
        return Err(Error::InvalidArgument("C must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = classes.len();
    let mut machines = Vec::new();
    let pairs: Vec<(usize, Option<usize>)> = match cfg.multiclass {
        Multiclass::Ovo => (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, Some(j)))).collect(),
        Multiclass::Ovr => (0..k).map(|i| (i, None)).collect(),
    };
    for (pos, neg) in pairs {
        let mut xs: Vec<&[f64]> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for (row, &c) in x.iter().zip(&yi) {
            if c == pos {
                xs.push(row);
                ys.push(1.0);
            } else if neg.is_none_or(|n| n == c) {
                xs.push(row);
                ys.push(-1.0);
            }
        }
        let svm = train_binary(&xs, &ys, cfg, &mut rng);
        machines.push(Machine { positive: pos, negative: neg, svm });
    }
    Ok(LinearSvm { classes, multiclass: cfg.multiclass, machines })
}

impl LinearSvm {
    pub fn predict_row(&self, x: &[f64]) -> usize {
        let k = self.classes.len();
        let winner = match self.multiclass {
            Multiclass::Ovr => {
                let mut best = (f64::NEG_INFINITY, 0);
                for m in &self.machines {
                    let v = m.svm.decision(x);
                    if v > best.0 {
                        best = (v, m.positive);
                    }
                }
                best.1
            }
            Multiclass::Ovo => {
                let mut votes = alloc::vec![0usize; k];
                let mut confidence = alloc::vec![0.0f64; k];
                for m in &self.machines {
                    let v = m.svm.decision(x);
                    let neg = m.negative.expect("pairwise machine");
                    if v > 0.0 {
                        votes[m.positive] += 1;
                    } else {
                        votes[neg] += 1;
                    }
                    confidence[m.positive] += v;
                    confidence[neg] -= v;
                }
                (0..k)
                    .max_by(|&a, &b| {
                        votes[a]
                            .cmp(&votes[b])
                            .then(confidence[a].total_cmp(&confidence[b]))
                            .then(b.cmp(&a))
                    })
                    .expect("at least two classes")
            }
        };
        self.classes[winner]
    }
}
