use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::class_index;
use crate::math::{exp, ln, sqrt};
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    /// Weight decay: adds `l2 / (2 batch) Σ W²` to the batch loss.
    pub l2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden: alloc::vec![10, 30, 10],
            epochs: 200,
            lr: 1e-3,
            batch_size: 64,
            l2: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Fully connected ReLU network with a softmax output. Parameters are
/// stored flat, layer by layer: the `out x in` weight matrix row-major,
/// then the `out` biases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub classes: Vec<usize>,
    pub sizes: Vec<usize>,
    pub params: Vec<f64>,
    pub l2: f64,
}

impl Mlp {
    fn layer_offsets(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut at = 0;
        for w in self.sizes.windows(2) {
            out.push((at, at + w[0] * w[1]));
            at += w[0] * w[1] + w[1];
        }
        out
    }

    /// Glorot-uniform weights and biases.
    pub fn init(classes: Vec<usize>, sizes: Vec<usize>, l2: f64, rng: &mut ChaCha8Rng) -> Self {
        let mut params = Vec::new();
        for w in sizes.windows(2) {
            let limit = sqrt(6.0 / (w[0] + w[1]) as f64);
            for _ in 0..w[0] * w[1] + w[1] {
                params.push(rng.gen_range(-limit..limit));
            }
        }
        Mlp { classes, sizes, params, l2 }
    }

    /// Pre-activations and activations of every layer; the last entry of
    /// the activations is the softmax output.
    fn forward_all(&self, x: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let offsets = self.layer_offsets();
        let mut acts = alloc::vec![x.to_vec()];
        let mut pre = Vec::new();
        let last = offsets.len() - 1;
        for (l, &(w0, b0)) in offsets.iter().enumerate() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let input = &acts[l];
            let z: Vec<f64> = (0..n_out)
                .map(|o| {
                    let row = &self.params[w0 + o * n_in..w0 + (o + 1) * n_in];
                    row.iter().zip(input).map(|(a, b)| a * b).sum::<f64>() + self.params[b0 + o]
                })
                .collect();
            let a = if l == last { softmax(&z) } else { z.iter().map(|&v| v.max(0.0)).collect() };
            pre.push(z);
            acts.push(a);
        }
        (pre, acts)
    }

    pub fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        self.forward_all(x).1.pop().expect("output layer")
    }

    pub fn predict_row(&self, x: &[f64]) -> usize {
        let p = self.probabilities(x);
        let mut best = 0;
        for (i, &v) in p.iter().enumerate() {
            if v > p[best] {
                best = i;
            }
        }
        self.classes[best]
    }

    /// Mean cross-entropy over the batch plus weight decay, and its gradient
    /// with respect to `params`. `ys` are class indices.
    pub fn loss_and_gradient(&self, xs: &[&[f64]], ys: &[usize]) -> (f64, Vec<f64>) {
        let offsets = self.layer_offsets();
        let mut grad = alloc::vec![0.0; self.params.len()];
        let mut loss = 0.0;
        let nb = xs.len() as f64;
        for (x, &y) in xs.iter().zip(ys) {
            let (pre, acts) = self.forward_all(x);
            let out = acts.last().expect("output");
            loss -= ln(out[y].max(1e-300));
            let mut delta: Vec<f64> = out.clone();
            delta[y] -= 1.0;
            for l in (0..offsets.len()).rev() {
                let (w0, b0) = offsets[l];
                let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
                let input = &acts[l];
                for o in 0..n_out {
                    let d = delta[o];
                    if d == 0.0 {
                        continue;
                    }
                    grad[b0 + o] += d;
                    let g = &mut grad[w0 + o * n_in..w0 + (o + 1) * n_in];
                    for (gi, &a) in g.iter_mut().zip(input) {
                        *gi += d * a;
                    }
                }
                if l > 0 {
                    let mut next = alloc::vec![0.0; n_in];
                    for o in 0..n_out {
                        let d = delta[o];
                        if d == 0.0 {
                            continue;
                        }
                        let row = &self.params[w0 + o * n_in..w0 + (o + 1) * n_in];
                        for (ni, &w) in next.iter_mut().zip(row) {
                            *ni += w * d;
                        }
                    }
                    for (ni, &z) in next.iter_mut().zip(&pre[l - 1]) {
                        if z <= 0.0 {
                            *ni = 0.0;
                        }
                    }
                    delta = next;
                }
            }
        }
        grad.iter_mut().for_each(|g| *g /= nb);
        loss /= nb;
        if self.l2 > 0.0 {
            for &(w0, b0) in &offsets {
                for j in w0..b0 {
                    let w = self.params[j];
                    loss += self.l2 / (2.0 * nb) * w * w;
                    grad[j] += self.l2 / nb * w;
                }
            }
        }
        (loss, grad)
    }

    /// Mean cross-entropy (plus decay) on a whole dataset.
    pub fn loss(&self, x: &[Vec<f64>], yi: &[usize]) -> f64 {
        let xs: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
        self.loss_and_gradient(&xs, yi).0
    }
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|&v| exp(v - m)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Trained network and its full-data loss after every epoch.
pub fn mlp_train_with_history(
    x: &[Vec<f64>],
    y: &[usize],
    cfg: &MlpConfig,
    seed: u64,
) -> Result<(Mlp, Vec<f64>)> {
    let (classes, yi) = class_index(x, y)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sizes = alloc::vec![x[0].len()];
    sizes.extend(&cfg.hidden);
    sizes.push(classes.len());
    let mut net = Mlp::init(classes, sizes, cfg.l2, &mut rng);
    let mut m = alloc::vec![0.0; net.params.len()];
    let mut v = alloc::vec![0.0; net.params.len()];
    let mut t = 0i32;
    let mut order: Vec<usize> = (0..x.len()).collect();
    let batch = cfg.batch_size.clamp(1, x.len());
    let mut history = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(batch) {
            let xs: Vec<&[f64]> = chunk.iter().map(|&i| x[i].as_slice()).collect();
            let ys: Vec<usize> = chunk.iter().map(|&i| yi[i]).collect();
            let (_, g) = net.loss_and_gradient(&xs, &ys);
            t += 1;
            let c1 = 1.0 - libm::pow(cfg.beta1, t as f64);
            let c2 = 1.0 - libm::pow(cfg.beta2, t as f64);
            for j in 0..g.len() {
                m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
                v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
                net.params[j] -= cfg.lr * (m[j] / c1) / (sqrt(v[j] / c2) + cfg.eps);
            }
        }
        history.push(net.loss(x, &yi));
    }
    Ok((net, history))
}

pub fn mlp_train(x: &[Vec<f64>], y: &[usize], cfg: &MlpConfig, seed: u64) -> Result<Mlp> {
    mlp_train_with_history(x, y, cfg, seed).map(|r| r.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn blobs(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let c = i % 3;
            x.push(vec![c as f64 + rng.gen_range(-0.3..0.3), (c * c) as f64 + rng.gen_range(-0.3..0.3)]);
            y.push(c + 5);
        }
        (x, y)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (x, y) = blobs(10, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = Mlp::init(vec![5, 6, 7], vec![2, 4, 5, 3], 1e-2, &mut rng);
        let xs: Vec<&[f64]> = x.iter().map(Vec::as_slice).collect();
        let ys: Vec<usize> = y.iter().map(|c| c - 5).collect();
        let (_, g) = net.loss_and_gradient(&xs, &ys);
        let h = 1e-6;
        for j in 0..net.params.len() {
            let mut a = net.clone();
            a.params[j] += h;
            let mut b = net.clone();
            b.params[j] -= h;
            let fd = (a.loss_and_gradient(&xs, &ys).0 - b.loss_and_gradient(&xs, &ys).0) / (2.0 * h);
            let scale = fd.abs().max(g[j].abs()).max(1e-4);
            assert!((fd - g[j]).abs() / scale < 1e-5, "param {j}: fd {fd} vs {}", g[j]);
        }
    }

    #[test]
    fn learns_blobs_and_loss_falls() {
        let (x, y) = blobs(20, 4);
        let cfg = MlpConfig { epochs: 300, lr: 1e-2, ..Default::default() };
        let (net, hist) = mlp_train_with_history(&x, &y, &cfg, 9).unwrap();
        assert!(hist.windows(2).all(|w| w[1] <= w[0] + 1e-9));
        let acc = x.iter().zip(&y).filter(|(r, &c)| net.predict_row(r) == c).count();
        assert_eq!(acc, 20);
    }
}
