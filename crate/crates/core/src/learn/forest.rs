use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::class_index;
use crate::math::sqrt;
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Features tried per split; `None` means `ceil(sqrt(n_features))`.
    pub max_features: Option<usize>,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig { n_trees: 300, max_depth: None, min_samples_split: 2, max_features: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf { class: usize },
    /// Goes left when `x[feature] <= threshold`.
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    /// Class index predicted for one row.
    pub fn predict_index(&self, x: &[f64]) -> usize {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { class } => return *class,
                Node::Split { feature, threshold, left, right } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub classes: Vec<usize>,
    pub trees: Vec<Tree>,
}

/// Independent seed for tree `t`, so trees can be grown in any order.
pub fn tree_seed(seed: u64, t: usize) -> u64 {
    let mut z = seed ^ (t as u64).wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}

struct Split {
    feature: usize,
    threshold: f64,
    score: f64,
}

fn best_split_on(x: &[Vec<f64>], y: &[usize], k: usize, idx: &mut [usize], f: usize) -> Option<Split> {
    idx.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]));
    let n = idx.len();
    let mut right = alloc::vec![0usize; k];
    for &i in idx.iter() {
        right[y[i]] += 1;
    }
    let mut left = alloc::vec![0usize; k];
    let mut sq_left = 0.0f64;
    let mut sq_right: f64 = right.iter().map(|&c| (c * c) as f64).sum();
    let mut best: Option<Split> = None;
    for pos in 0..n - 1 {
        let c = y[idx[pos]];
        sq_left += (2 * left[c] + 1) as f64;
        left[c] += 1;
        sq_right -= (2 * right[c] - 1) as f64;
        right[c] -= 1;
        let (a, b) = (x[idx[pos]][f], x[idx[pos + 1]][f]);
        if a == b {
            continue;
        }
        let nl = (pos + 1) as f64;
        let nr = (n - pos - 1) as f64;
        // n_l * gini_l + n_r * gini_r
        let score = (nl - sq_left / nl) + (nr - sq_right / nr);
        if best.as_ref().is_none_or(|s| score < s.score) {
            let mut threshold = a + (b - a) / 2.0;
            if threshold >= b {
                threshold = a;
            }
            best = Some(Split { feature: f, threshold, score });
        }
    }
    best
}

/// Grows one CART tree on a bootstrap sample.
pub fn train_tree(x: &[Vec<f64>], y: &[usize], k: usize, cfg: &ForestConfig, seed: u64) -> Tree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = x.len();
    let p = x[0].len();
    let mtry = cfg
        .max_features
        .unwrap_or_else(|| libm::ceil(sqrt(p as f64)) as usize)
        .clamp(1, p);
    let sample: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
    let mut nodes: Vec<Node> = Vec::new();
    // (slot, samples, depth)
    let mut stack: Vec<(usize, Vec<usize>, usize)> = alloc::vec![(0, sample, 0)];
    nodes.push(Node::Leaf { class: 0 });
    let mut features: Vec<usize> = (0..p).collect();
    while let Some((slot, mut idx, depth)) = stack.pop() {
        let mut counts = alloc::vec![0usize; k];
        for &i in &idx {
            counts[y[i]] += 1;
        }
        let leaf = Node::Leaf { class: majority(&counts) };
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || idx.len() < cfg.min_samples_split || cfg.max_depth.is_some_and(|m| depth >= m) {
            nodes[slot] = leaf;
            continue;
        }
        features.shuffle(&mut rng);
        let mut best: Option<Split> = None;
        for (tried, &f) in features.iter().enumerate() {
            if tried >= mtry && best.is_some() {
                break;
            }
            if let Some(s) = best_split_on(x, y, k, &mut idx, f) {
                if best.as_ref().is_none_or(|b| s.score < b.score) {
                    best = Some(s);
                }
            }
        }
        let Some(split) = best else {
            nodes[slot] = leaf;
            continue;
        };
        let (l, r): (Vec<usize>, Vec<usize>) =
            idx.iter().partition(|&&i| x[i][split.feature] <= split.threshold);
        let left = nodes.len();
        nodes.push(Node::Leaf { class: 0 });
        let right = nodes.len();
        nodes.push(Node::Leaf { class: 0 });
        nodes[slot] = Node::Split { feature: split.feature, threshold: split.threshold, left, right };
        stack.push((right, r, depth + 1));
        stack.push((left, l, depth + 1));
    }
    Tree { nodes }
}

pub fn rfc_train(x: &[Vec<f64>], y: &[usize], cfg: &ForestConfig, seed: u64) -> Result<RandomForest> {
    let (classes, yi) = class_index(x, y)?;
    let trees = (0..cfg.n_trees)
        .map(|t| train_tree(x, &yi, classes.len(), cfg, tree_seed(seed, t)))
        .collect();
    Ok(RandomForest { classes, trees })
}

impl RandomForest {
    /// Majority vote over trees; ties go to the smaller label.
    pub fn predict_row(&self, x: &[f64]) -> usize {
        let mut votes = alloc::vec![0usize; self.classes.len()];
        for t in &self.trees {
            votes[t.predict_index(x)] += 1;
        }
        self.classes[majority(&votes)]
    }
}
