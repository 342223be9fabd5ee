//! Parallel versions of the per-variety pipeline. Every function returns
//! exactly what its sequential counterpart would, whatever the thread count.

use qperiod_core::asymptotics::{rank2_asymptotics, wps_asymptotics};
use qperiod_core::features::{extract_features, log_prefix, SamplingPolicy, Window};
use qperiod_core::generate::{
    drive, rank2_candidate, wps_candidate, GenConfig, Rank2Collector, StratumReport, WpsCollector,
};
use qperiod_core::learn::{class_index, train_tree, tree_seed, ForestConfig, Model, ModelSpec, RandomForest};
use qperiod_core::periods::{rank2_log_coeffs, wps_log_coeffs, PeriodSequence};
use qperiod_core::varieties::{WeightMatrix, WeightVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{DatasetRecord, Variety, PREFIX_LEN};
use crate::error::{Error, Result};

pub fn gen_wps(cfg: &GenConfig) -> Result<(Vec<WeightVector>, Vec<StratumReport>)> {
    let mut c = WpsCollector::default();
    let reports = drive(cfg, &mut c, |dim, r| r.into_par_iter().map(|i| wps_candidate(cfg, dim, i)).collect())?;
    Ok((c.items, reports))
}

pub fn gen_rank2(cfg: &GenConfig) -> Result<(Vec<WeightMatrix>, Vec<StratumReport>)> {
    let mut c = Rank2Collector::default();
    let reports = drive(cfg, &mut c, |dim, r| r.into_par_iter().map(|i| rank2_candidate(cfg, dim, i)).collect())?;
    Ok((c.items, reports))
}

/// Fails on a shortfall like the core generators do.
pub fn require_count<T>(items: Vec<T>, reports: &[StratumReport], wanted: usize) -> Result<Vec<T>> {
    if items.len() < wanted {
        let draws = reports.iter().map(|r| r.draws).sum();
        return Err(qperiod_core::Error::TargetUnreachable { found: items.len(), wanted, draws }.into());
    }
    Ok(items)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureParams {
    pub d_max: usize,
    pub policy: SamplingPolicy,
    pub with_prefix: bool,
}

impl FeatureParams {
    pub fn wps_desk() -> Self {
        FeatureParams { d_max: 10_000, policy: SamplingPolicy::WPS, with_prefix: false }
    }

    pub fn rank2_desk() -> Self {
        FeatureParams { d_max: 5000, policy: SamplingPolicy::RANK2_DESK, with_prefix: true }
    }

    pub fn rank2_full() -> Self {
        FeatureParams { d_max: 20_000, policy: SamplingPolicy::RANK2_FULL, with_prefix: true }
    }

    /// Coefficients are needed past the window end to snap the last grid
    /// point to a nonzero term.
    pub fn with_window(mut self, w: Window) -> Self {
        self.policy = SamplingPolicy::NextNonzero(w);
        self.d_max = self.d_max.max(w.hi);
        self
    }
}

pub fn log_coeffs(v: &Variety, d_max: usize) -> PeriodSequence {
    match v {
        Variety::Wps(w) => wps_log_coeffs(w, d_max),
        Variety::Rank2(w) => rank2_log_coeffs(w, d_max),
    }
}

pub fn compute_record(v: &Variety, p: &FeatureParams) -> Result<DatasetRecord> {
    let seq = log_coeffs(v, p.d_max.max(PREFIX_LEN));
    let fit = extract_features(&seq, &p.policy)?;
    let asy = match v {
        Variety::Wps(w) => wps_asymptotics(w),
        Variety::Rank2(w) => rank2_asymptotics(w)?,
    };
    let log_prefix = p.with_prefix.then(|| log_prefix(&seq));
    Ok(DatasetRecord {
        variety: v.clone(),
        dim: v.dimension(),
        slope: fit.slope,
        intercept: fit.intercept,
        se_slope: fit.se_slope,
        se_int: fit.se_intercept,
        a: asy.a,
        b: asy.b,
        log_prefix,
    })
}

/// One result per input, in input order.
pub fn compute_records(vs: &[Variety], p: &FeatureParams) -> Vec<Result<DatasetRecord>> {
    vs.par_iter().map(|v| compute_record(v, p)).collect()
}

/// Random forest with trees grown in parallel; identical to
/// `qperiod_core::learn::rfc_train` for the same seed.
pub fn rfc_train(x: &[Vec<f64>], y: &[usize], cfg: &ForestConfig, seed: u64) -> Result<RandomForest> {
    let (classes, yi) = class_index(x, y)?;
    let k = classes.len();
    let trees = (0..cfg.n_trees).into_par_iter().map(|t| train_tree(x, &yi, k, cfg, tree_seed(seed, t))).collect();
    Ok(RandomForest { classes, trees })
}

/// `Model::fit`, with forests trained in parallel.
pub fn fit_model(spec: &ModelSpec, x: &[Vec<f64>], y: &[usize], seed: u64) -> Result<Model> {
    match spec {
        ModelSpec::Rfc(cfg) => {
            let st = qperiod_core::learn::Standardizer::fit(x)?;
            let xs = st.apply(x)?;
            let forest = rfc_train(&xs, y, cfg, seed)?;
            Ok(Model::from_parts(st, qperiod_core::learn::ClassifierModel::Rfc(forest)))
        }
        _ => Ok(Model::fit(spec, x, y, seed)?),
    }
}

/// Design matrix and labels from records: two features, or 102 when
/// `prefix` is set.
pub fn design(records: &[DatasetRecord], prefix: bool) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    let x = records
        .iter()
        .map(|r| {
            if prefix {
                r.features_102().ok_or_else(|| Error::Invalid("record has no log_prefix".into()))
            } else {
                Ok(r.features_2())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((x, records.iter().map(|r| r.dim).collect()))
}
