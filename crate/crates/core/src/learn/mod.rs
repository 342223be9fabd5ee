//! Classifiers predicting dimension from period features: linear SVM,
//! random forest and a small ReLU network, plus evaluation helpers.

mod forest;
mod metrics;
mod mlp;
mod standardize;
mod svm;

pub use forest::{rfc_train, train_tree, tree_seed, ForestConfig, Node, RandomForest, Tree};
pub use metrics::{evaluate_predictions, EvalReport};
pub use mlp::{mlp_train, mlp_train_with_history, Mlp, MlpConfig};
pub use standardize::Standardizer;
pub use svm::{svm_train, BinarySvm, LinearSvm, Machine, Multiclass, SvmConfig, SvmSolver};

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::math::{mean, std_dev};
use crate::{Error, Result};

/// Sorted distinct labels and each sample's index into them.
pub fn class_index(x: &[Vec<f64>], y: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    if x.is_empty() || x.len() != y.len() {
        return Err(Error::InvalidArgument("need equally many rows and labels, at least one".into()));
    }
    let mut classes = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::SingleClass);
    }
    let yi = y.iter().map(|c| classes.binary_search(c).expect("present")).collect();
    Ok((classes, yi))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Svm(SvmConfig),
    Rfc(ForestConfig),
    Mlp(MlpConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum ClassifierModel {
    Svm(LinearSvm),
    Rfc(RandomForest),
    Mlp(Mlp),
}

impl ClassifierModel {
    pub fn classes(&self) -> &[usize] {
        match self {
            ClassifierModel::Svm(m) => &m.classes,
            ClassifierModel::Rfc(m) => &m.classes,
            ClassifierModel::Mlp(m) => &m.classes,
        }
    }

    pub fn predict_row(&self, x: &[f64]) -> usize {
        match self {
            ClassifierModel::Svm(m) => m.predict_row(x),
            ClassifierModel::Rfc(m) => m.predict_row(x),
            ClassifierModel::Mlp(m) => m.predict_row(x),
        }
    }
}

pub fn train_classifier(spec: &ModelSpec, x: &[Vec<f64>], y: &[usize], seed: u64) -> Result<ClassifierModel> {
    Ok(match spec {
        ModelSpec::Svm(c) => ClassifierModel::Svm(svm_train(x, y, c, seed)?),
        ModelSpec::Rfc(c) => ClassifierModel::Rfc(rfc_train(x, y, c, seed)?),
        ModelSpec::Mlp(c) => ClassifierModel::Mlp(mlp_train(x, y, c, seed)?),
    })
}

/// A classifier together with the standardization fitted on its training
/// features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub standardizer: Standardizer,
    pub classifier: ClassifierModel,
}

impl Model {
    pub fn fit(spec: &ModelSpec, x: &[Vec<f64>], y: &[usize], seed: u64) -> Result<Model> {
        let standardizer = Standardizer::fit(x)?;
        let xs = standardizer.apply(x)?;
        Ok(Model { classifier: train_classifier(spec, &xs, y, seed)?, standardizer })
    }

    /// Assembles a model from a standardizer and an already trained
    /// classifier, e.g. a forest grown in parallel.
    pub fn from_parts(standardizer: Standardizer, classifier: ClassifierModel) -> Model {
        Model { standardizer, classifier }
    }

    pub fn predict_row(&self, x: &[f64]) -> Result<usize> {
        Ok(self.classifier.predict_row(&self.standardizer.apply_row(x)?))
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<usize>> {
        x.iter().map(|r| self.predict_row(r)).collect()
    }

    pub fn evaluate(&self, x: &[Vec<f64>], y: &[usize], split_seed: Option<u64>) -> Result<EvalReport> {
        evaluate_predictions(y, &self.predict(x)?, split_seed)
    }

    pub fn accuracy(&self, x: &[Vec<f64>], y: &[usize]) -> Result<f64> {
        Ok(self.evaluate(x, y, None)?.accuracy)
    }
}

/// Seeded shuffle split: `round(train_frac * n)` training indices, the rest
/// for validation.
pub fn train_test_split(n: usize, train_frac: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = libm::round(train_frac.clamp(0.0, 1.0) * n as f64) as usize;
    let val = idx.split_off(n_train.min(n));
    (idx, val)
}

pub fn select_rows(x: &[Vec<f64>], y: &[usize], idx: &[usize]) -> (Vec<Vec<f64>>, Vec<usize>) {
    (idx.iter().map(|&i| x[i].clone()).collect(), idx.iter().map(|&i| y[i]).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub train_frac: f64,
    pub train_mean: f64,
    pub train_sd: f64,
    pub val_mean: f64,
    pub val_sd: f64,
}

/// Train and validation accuracy per training fraction, mean and spread
/// over one split per seed.
pub fn learning_curve(
    spec: &ModelSpec,
    x: &[Vec<f64>],
    y: &[usize],
    train_fracs: &[f64],
    seeds: &[u64],
) -> Result<Vec<CurvePoint>> {
    let mut out = Vec::new();
    for &frac in train_fracs {
        if !(frac > 0.0 && frac < 1.0) {
            return Err(Error::InvalidArgument("training fractions must lie in (0, 1)".into()));
        }
        let mut train = Vec::new();
        let mut val = Vec::new();
        for &seed in seeds {
            let (tr, va) = train_test_split(x.len(), frac, seed);
            let (xt, yt) = select_rows(x, y, &tr);
            let (xv, yv) = select_rows(x, y, &va);
            let model = Model::fit(spec, &xt, &yt, seed)?;
            train.push(model.accuracy(&xt, &yt)?);
            val.push(model.accuracy(&xv, &yv)?);
        }
        out.push(CurvePoint {
            train_frac: frac,
            train_mean: mean(&train),
            train_sd: std_dev(&train),
            val_mean: mean(&val),
            val_sd: std_dev(&val),
        });
    }
    Ok(out)
}

/// Mean accuracy drop when one feature column is shuffled, per feature.
pub fn permutation_importance(
    model: &Model,
    x: &[Vec<f64>],
    y: &[usize],
    seed: u64,
    repeats: usize,
) -> Result<Vec<f64>> {
    let base = model.accuracy(x, y)?;
    let p = model.standardizer.n_features();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(p);
    for j in 0..p {
        let mut drop = 0.0;
        for _ in 0..repeats {
            let mut col: Vec<f64> = x.iter().map(|r| r[j]).collect();
            col.shuffle(&mut rng);
            let xp: Vec<Vec<f64>> = x
                .iter()
                .zip(&col)
                .map(|(r, &v)| {
                    let mut r = r.clone();
                    r[j] = v;
                    r
                })
                .collect();
            drop += base - model.accuracy(&xp, y)?;
        }
        out.push(drop / repeats.max(1) as f64);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn split_sizes_and_determinism() {
        let (a, b) = train_test_split(10, 0.7, 3);
        assert_eq!((a.len(), b.len()), (7, 3));
        assert_eq!(train_test_split(10, 0.7, 3), (a, b));
    }

    #[test]
    fn constant_feature_has_no_importance() {
        let x: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64, 0.0]).collect();
        let y: Vec<usize> = (0..40).map(|i| usize::from(i >= 20)).collect();
        let m = Model::fit(&ModelSpec::Svm(SvmConfig::default()), &x, &y, 0).unwrap();
        let imp = permutation_importance(&m, &x, &y, 5, 10).unwrap();
        assert_eq!(imp[1], 0.0);
        assert!(imp[0] > 0.2);
        assert_eq!(imp, permutation_importance(&m, &x, &y, 5, 10).unwrap());
    }
}
