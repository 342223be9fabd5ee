//! Named end-to-end runs. Each writes its artifacts into an output
//! directory together with a report recording the seed and settings used.

use std::fs;
use std::path::{Path, PathBuf};

use qperiod_core::asymptotics::{
    cluster_bound, predicted_log_coeff, rank2_asymptotics, wps_asymptotics, BoundMode, ClusterBound,
};
use qperiod_core::features::{extract_features, LinearFit, SamplingPolicy, Window};
use qperiod_core::generate::{enumerate_wps, GenConfig, StratumReport};
use qperiod_core::learn::{
    learning_curve, select_rows, train_test_split, CurvePoint, EvalReport, ForestConfig, MlpConfig, Model,
    ModelSpec, SvmConfig,
};
use qperiod_core::math::ln_gamma;
use qperiod_core::periods::{rank2_log_coeffs, wps_log_coeffs, Family};
use qperiod_core::varieties::{WeightMatrix, WeightVector};
use serde::{Deserialize, Serialize};

use crate::batch::{self, FeatureParams};
use crate::dataset::{write_dataset, DatasetRecord, Variety};
use crate::error::{Error, Result};
use crate::persist::{save_json, save_model, write_curve_csv, write_features_csv, ModelFile};

pub const EXPERIMENTS: [&str; 9] = [
    "wps-svm",
    "rank2-svm",
    "rank2-rfc",
    "rank2-mlp2",
    "rank2-mlp102",
    "outlier-verify",
    "asymptotics-verify",
    "bounds-verify",
    "enumerate-dim3",
];

pub const OUTLIER_TOP: [i64; 7] = [1, 10, 5, 13, 8, 12, 0];
pub const OUTLIER_BOTTOM: [i64; 7] = [0, 0, 3, 8, 5, 14, 1];

pub fn outlier_matrix() -> WeightMatrix {
    WeightMatrix::validate_rank2(&OUTLIER_TOP, &OUTLIER_BOTTOM).expect("valid weight matrix")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Svm,
    Rfc,
    Mlp2,
    Mlp102,
}

impl ModelKind {
    pub fn uses_prefix(self) -> bool {
        self == ModelKind::Mlp102
    }

    pub fn n_features(self) -> usize {
        if self.uses_prefix() {
            102
        } else {
            2
        }
    }

    /// C = 10 for weighted projective spaces and 50 for rank two.
    pub fn spec(self, family: Family, rfc_trees: usize) -> ModelSpec {
        match self {
            ModelKind::Svm => {
                let c = if family == Family::Wps { 10.0 } else { 50.0 };
                ModelSpec::Svm(SvmConfig { c, ..SvmConfig::default() })
            }
            ModelKind::Rfc => ModelSpec::Rfc(ForestConfig { n_trees: rfc_trees, ..ForestConfig::default() }),
            ModelKind::Mlp2 | ModelKind::Mlp102 => ModelSpec::Mlp(MlpConfig::default()),
        }
    }
}

/// Command-line overrides; `None` keeps the experiment default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub count: Option<usize>,
    pub dim_min: Option<usize>,
    pub dim_max: Option<usize>,
    pub d_max: Option<usize>,
    pub window: Option<Window>,
    pub filter_se: Option<f64>,
    pub train_frac: Option<f64>,
    pub rfc_trees: Option<usize>,
    /// outlier-verify: also fit the 20,000-40,000 window.
    pub extended: bool,
    /// Classification runs: also write a learning curve.
    pub curve: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationSettings {
    pub family: Family,
    pub model: ModelKind,
    pub seed: u64,
    pub count: usize,
    pub dim_min: usize,
    pub dim_max: usize,
    pub features: FeatureParams,
    pub filter_se: Option<f64>,
    pub train_frac: f64,
    pub rfc_trees: usize,
}

impl ClassificationSettings {
    /// 20,000 varieties in dimensions 3 to 10, all nonzero terms up to
    /// 10,000, 10% for training.
    pub fn wps_desk(model: ModelKind) -> Self {
        ClassificationSettings {
            family: Family::Wps,
            model,
            seed: 0,
            count: 20_000,
            dim_min: 3,
            dim_max: 10,
            features: FeatureParams::wps_desk(),
            filter_se: None,
            train_frac: 0.1,
            rfc_trees: ForestConfig::default().n_trees,
        }
    }

    /// 24,000 varieties in dimensions 6 to 10, window 500-5,000 step 50,
    /// `s_int < 1.2` (0.3 scaled by the shorter window), 70% for training.
    /// About 11,000 records survive the filter.
    pub fn rank2_desk(model: ModelKind) -> Self {
        ClassificationSettings {
            family: Family::Rank2,
            model,
            seed: 0,
            count: 24_000,
            dim_min: 6,
            dim_max: 10,
            features: FeatureParams::rank2_desk(),
            filter_se: Some(0.3 * 20_000.0 / 5000.0),
            train_frac: 0.7,
            rfc_trees: ForestConfig::default().n_trees,
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(x) = o.seed {
            self.seed = x;
        }
        if let Some(x) = o.count {
            self.count = x;
        }
        if let Some(x) = o.dim_min {
            self.dim_min = x;
        }
        if let Some(x) = o.dim_max {
            self.dim_max = x;
        }
        if let Some(w) = o.window {
            self.features = self.features.clone().with_window(w);
        }
        if let Some(x) = o.d_max {
            self.features.d_max = x;
        }
        if let Some(x) = o.filter_se {
            self.filter_se = Some(x);
        }
        if let Some(x) = o.train_frac {
            self.train_frac = x;
        }
        if let Some(x) = o.rfc_trees {
            self.rfc_trees = x;
        }
    }

    pub fn gen_config(&self) -> GenConfig {
        let mk = if self.family == Family::Wps { GenConfig::wps } else { GenConfig::rank2 };
        mk(self.count, self.dim_min, self.dim_max, self.seed)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub records: Vec<DatasetRecord>,
    pub strata: Vec<StratumReport>,
    pub generated: usize,
    /// Varieties whose features could not be computed.
    pub failed: usize,
    pub filtered_out: usize,
}

/// Generates, computes features and applies the `s_int` filter.
pub fn build_dataset(s: &ClassificationSettings) -> Result<Dataset> {
    let cfg = s.gen_config();
    let (varieties, strata): (Vec<Variety>, _) = match s.family {
        Family::Wps => {
            let (items, rep) = batch::gen_wps(&cfg)?;
            (items.into_iter().map(Variety::Wps).collect(), rep)
        }
        Family::Rank2 => {
            let (items, rep) = batch::gen_rank2(&cfg)?;
            (items.into_iter().map(Variety::Rank2).collect(), rep)
        }
    };
    let generated = varieties.len();
    let computed: Vec<DatasetRecord> =
        batch::compute_records(&varieties, &s.features).into_iter().filter_map(|r| r.ok()).collect();
    let failed = generated - computed.len();
    let before = computed.len();
    let records: Vec<DatasetRecord> = match s.filter_se {
        Some(t) => computed.into_iter().filter(|r| r.se_int < t).collect(),
        None => computed,
    };
    Ok(Dataset { filtered_out: before - records.len(), records, strata, generated, failed })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub model: Model,
    pub report: EvalReport,
    pub n_train: usize,
    pub n_val: usize,
}

/// Seeded split, fit on the training part, evaluate on the rest.
pub fn train_and_evaluate(
    records: &[DatasetRecord],
    spec: &ModelSpec,
    prefix: bool,
    train_frac: f64,
    seed: u64,
) -> Result<TrainOutcome> {
    let (x, y) = batch::design(records, prefix)?;
    let (tr, va) = train_test_split(x.len(), train_frac, seed);
    let (xt, yt) = select_rows(&x, &y, &tr);
    let (xv, yv) = select_rows(&x, &y, &va);
    let model = batch::fit_model(spec, &xt, &yt, seed)?;
    let report = model.evaluate(&xv, &yv, Some(seed))?;
    Ok(TrainOutcome { model, report, n_train: tr.len(), n_val: va.len() })
}

#[derive(Serialize)]
struct ClassificationReport<'a> {
    experiment: &'a str,
    settings: &'a ClassificationSettings,
    strata: &'a [StratumReport],
    generated: usize,
    failed: usize,
    filtered_out: usize,
    records: usize,
    n_train: usize,
    n_val: usize,
    eval: &'a EvalReport,
}

fn run_classification(name: &str, mut s: ClassificationSettings, o: &Overrides, out: &Path) -> Result<Vec<PathBuf>> {
    s.apply(o);
    let data = build_dataset(&s)?;
    let spec = s.model.spec(s.family, s.rfc_trees);
    let t = train_and_evaluate(&data.records, &spec, s.model.uses_prefix(), s.train_frac, s.seed)?;
    let mut files = vec![out.join("dataset.jsonl"), out.join("features.csv"), out.join("model.json")];
    write_dataset(&files[0], &data.records)?;
    write_features_csv(&files[1], &data.records)?;
    save_model(&files[2], &ModelFile::new(spec.clone(), s.model.n_features(), s.seed, t.model))?;
    let report = ClassificationReport {
        experiment: name,
        settings: &s,
        strata: &data.strata,
        generated: data.generated,
        failed: data.failed,
        filtered_out: data.filtered_out,
        records: data.records.len(),
        n_train: t.n_train,
        n_val: t.n_val,
        eval: &t.report,
    };
    files.push(out.join("report.json"));
    save_json(&files[3], &report)?;
    if o.curve {
        let (x, y) = batch::design(&data.records, s.model.uses_prefix())?;
        let curve: Vec<CurvePoint> = learning_curve(&spec, &x, &y, &[0.1, 0.3, 0.5, 0.7, 0.9], &[0, 1, 2, 3, 4])?;
        files.push(out.join("curve.csv"));
        write_curve_csv(&files[4], &curve)?;
    }
    Ok(files)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowFit {
    pub d_max: usize,
    pub fit: LinearFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutlierReport {
    pub weight_matrix: [Vec<i64>; 2],
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub fits: Vec<WindowFit>,
}

/// Fits the outlier matrix over `window`, computing coefficients a little
/// past its end so the last grid point can snap forward.
pub fn outlier_fit(window: Window) -> Result<WindowFit> {
    let d_max = window.hi + 100;
    let seq = rank2_log_coeffs(&outlier_matrix(), d_max);
    Ok(WindowFit { d_max, fit: extract_features(&seq, &SamplingPolicy::NextNonzero(window))? })
}

pub fn outlier_report(extended: bool) -> Result<OutlierReport> {
    let w = outlier_matrix();
    let asy = rank2_asymptotics(&w)?;
    let mut fits = vec![outlier_fit(Window { lo: 1000, hi: 20_000, stride: 100 })?];
    if extended {
        fits.push(outlier_fit(Window { lo: 20_000, hi: 40_000, stride: 100 })?);
    }
    Ok(OutlierReport { weight_matrix: [OUTLIER_TOP.to_vec(), OUTLIER_BOTTOM.to_vec()], a: asy.a, b: asy.b, fits })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsReport {
    /// `(d, residual)` for P(1,1).
    pub p11_residuals: Vec<(usize, f64)>,
    pub p11_decreasing: bool,
    pub p2_residual_3000: f64,
    pub p1xp1_p: Vec<f64>,
    pub p1xp1_a: f64,
    pub p1xp1_b: f64,
    /// Residual of `2 log binom(4000, 2000)` against the prediction.
    pub p1xp1_exact_residual_4000: f64,
    /// Residual of the computed coefficient at 4,000.
    pub p1xp1_residual_4000: f64,
}

pub fn asymptotics_report() -> Result<AsymptoticsReport> {
    let p11 = WeightVector::validate_wps(&[1, 1])?;
    let asy = wps_asymptotics(&p11);
    let seq = wps_log_coeffs(&p11, 4000);
    let p11_residuals: Vec<(usize, f64)> = [500, 1000, 2000, 4000]
        .iter()
        .map(|&d| (d, seq.get(d).expect("even degree") - predicted_log_coeff(&asy, d as u64)))
        .collect();
    let p11_decreasing = p11_residuals.windows(2).all(|w| w[1].1.abs() < w[0].1.abs());
    let p2 = WeightVector::validate_wps(&[1, 1, 1])?;
    let asy2 = wps_asymptotics(&p2);
    let p2_residual_3000 =
        wps_log_coeffs(&p2, 3000).get(3000).expect("multiple of 3") - predicted_log_coeff(&asy2, 3000);
    let q = WeightMatrix::validate_rank2(&[1, 1, 0, 0], &[0, 0, 1, 1])?;
    let asyq = rank2_asymptotics(&q)?;
    let exact = 2.0 * (ln_gamma(4001.0) - 2.0 * ln_gamma(2001.0));
    let pred = predicted_log_coeff(&asyq, 4000);
    let computed = rank2_log_coeffs(&q, 4000).get(4000).expect("even degree");
    Ok(AsymptoticsReport {
        p11_residuals,
        p11_decreasing,
        p2_residual_3000,
        p1xp1_p: asyq.p.clone(),
        p1xp1_a: asyq.a,
        p1xp1_b: asyq.b,
        p1xp1_exact_residual_4000: exact - pred,
        p1xp1_residual_4000: computed - pred,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    /// Infimum of `B + (5/2)A` over probability vectors of length 6.
    pub min: ClusterBound,
    pub min_target: f64,
    pub min_holds: bool,
    /// Terminal 5-dimensional weighted projective spaces with all weights
    /// at most `max_weight`.
    pub max_weight: u64,
    pub count: usize,
    pub max_b_plus_5a: f64,
    pub argmax: Vec<u64>,
    pub max_target: f64,
    pub max_holds: bool,
}

pub const MIN_TARGET: f64 = 41.0 / 8.0;
pub const MAX_TARGET: f64 = 41.0 / 40.0;

pub fn bounds_report(max_weight: u64) -> Result<BoundsReport> {
    let min = cluster_bound(2.5, 6, BoundMode::Min, None)?;
    let all = enumerate_wps(5, max_weight)?;
    let mut best = (f64::NEG_INFINITY, Vec::new());
    for w in &all {
        let asy = wps_asymptotics(w);
        let v = asy.b + 5.0 * asy.a;
        if v > best.0 {
            best = (v, w.weights().to_vec());
        }
    }
    Ok(BoundsReport {
        min_holds: min.value >= MIN_TARGET - 1e-6,
        min,
        min_target: MIN_TARGET,
        max_weight,
        count: all.len(),
        max_b_plus_5a: best.0,
        argmax: best.1,
        max_target: MAX_TARGET,
        max_holds: best.0 <= MAX_TARGET,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnumerationReport {
    /// `(largest weight allowed, count)`
    pub counts: Vec<(u64, usize)>,
    pub varieties: Vec<Vec<u64>>,
}

pub fn enumerate_dim3_report(bounds: &[u64]) -> Result<EnumerationReport> {
    let mut counts = Vec::new();
    let mut varieties = Vec::new();
    for &b in bounds {
        let all = enumerate_wps(3, b)?;
        counts.push((b, all.len()));
        varieties = all.iter().map(|w| w.weights().to_vec()).collect();
    }
    Ok(EnumerationReport { counts, varieties })
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    experiment: &'a str,
    overrides: &'a Overrides,
    result: T,
}

fn stamped<T: Serialize>(out: &Path, name: &str, o: &Overrides, result: T) -> Result<Vec<PathBuf>> {
    let path = out.join(format!("{name}.json"));
    save_json(&path, &Stamped { experiment: name, overrides: o, result })?;
    Ok(vec![path])
}

/// Runs a named experiment into `out`, returning the files written.
pub fn run_experiment(name: &str, o: &Overrides, out: &Path) -> Result<Vec<PathBuf>> {
    if !EXPERIMENTS.contains(&name) {
        return Err(Error::UnknownExperiment { name: name.into(), known: EXPERIMENTS.join(", ") });
    }
    fs::create_dir_all(out)?;
    match name {
        "wps-svm" => run_classification(name, ClassificationSettings::wps_desk(ModelKind::Svm), o, out),
        "rank2-svm" => run_classification(name, ClassificationSettings::rank2_desk(ModelKind::Svm), o, out),
        "rank2-rfc" => run_classification(name, ClassificationSettings::rank2_desk(ModelKind::Rfc), o, out),
        "rank2-mlp2" => run_classification(name, ClassificationSettings::rank2_desk(ModelKind::Mlp2), o, out),
        "rank2-mlp102" => run_classification(name, ClassificationSettings::rank2_desk(ModelKind::Mlp102), o, out),
        "outlier-verify" => stamped(out, name, o, outlier_report(o.extended)?),
        "asymptotics-verify" => stamped(out, name, o, asymptotics_report()?),
        "bounds-verify" => stamped(out, name, o, bounds_report(25)?),
        _ => stamped(out, name, o, enumerate_dim3_report(&[20, 30])?),
    }
}
