use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qperiod::batch::{self, FeatureParams};
use qperiod::dataset::{read_dataset, read_varieties, write_dataset, write_varieties, Variety};
use qperiod::experiments::{
    enumerate_dim3_report, outlier_report, run_experiment, train_and_evaluate, ModelKind,
    Overrides,
};
use qperiod::persist::{load_model, save_json, save_model, write_features_csv, write_log_coeffs_csv, ModelFile};
use qperiod::{Error, Result};
use qperiod_core::asymptotics::{cluster_bound, rank2_asymptotics, wps_asymptotics, BoundMode};
use qperiod_core::features::Window;
use qperiod_core::generate::GenConfig;
use qperiod_core::learn::{select_rows, train_test_split};
use qperiod_core::periods::Family;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "qperiod", version, about = "Quantum-period features of toric Fano varieties")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Debug)]
struct Shared {
    #[arg(long)]
    seed: Option<u64>,
    /// Output file, or directory for `run`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    dmax: Option<usize>,
    /// Sampling window for rank-two fits, LO:HI:STRIDE.
    #[arg(long, value_parser = parse_window)]
    window: Option<Window>,
    /// Keep records with intercept standard error below this value.
    #[arg(long = "filter-se")]
    filter_se: Option<f64>,
    #[arg(long = "train-frac")]
    train_frac: Option<f64>,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long = "dim-min")]
    dim_min: Option<usize>,
    #[arg(long = "dim-max")]
    dim_max: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModelArg {
    Svm,
    Rfc,
    Mlp2,
    Mlp102,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Svm => ModelKind::Svm,
            ModelArg::Rfc => ModelKind::Rfc,
            ModelArg::Mlp2 => ModelKind::Mlp2,
            ModelArg::Mlp102 => ModelKind::Mlp102,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Random terminal weighted projective spaces (JSONL).
    GenWps(Shared),
    /// Random terminal rank-two toric varieties (JSONL).
    GenRank2(Shared),
    /// log c_d of one variety as CSV rows `d,log_c_d`.
    Periods {
        /// `a1,..,aN` or `a1,..,aN;b1,..,bN`
        variety: String,
        #[command(flatten)]
        shared: Shared,
    },
    /// Regression features and asymptotic constants for a variety list.
    Features {
        input: PathBuf,
        /// Also write `kind,dim,slope,...` rows to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        shared: Shared,
    },
    /// A, B, θ, direction and p of one variety as JSON.
    Asympt {
        variety: String,
        #[command(flatten)]
        shared: Shared,
    },
    /// Train a classifier on a dataset and save it.
    Train {
        input: PathBuf,
        #[command(flatten)]
        shared: Shared,
    },
    /// Evaluate a saved model on a dataset, or on the validation part of a
    /// seeded split when --train-frac is given.
    Eval {
        input: PathBuf,
        #[arg(long = "model-file")]
        model_file: PathBuf,
        #[command(flatten)]
        shared: Shared,
    },
    /// Extremes of B + θA over probability vectors of length N.
    Bounds {
        #[arg(long, default_value_t = 2.5)]
        theta: f64,
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Min)]
        mode: ModeArg,
        /// Lower bound on each p_i in max mode.
        #[arg(long)]
        eps: Option<f64>,
        #[command(flatten)]
        shared: Shared,
    },
    /// Fit the outlier weight matrix over the 1,000-20,000 window.
    VerifyOutlier {
        /// Also fit 20,000-40,000.
        #[arg(long)]
        extended: bool,
        #[command(flatten)]
        shared: Shared,
    },
    /// Count terminal 3-dimensional weighted projective spaces.
    EnumerateDim3 {
        #[arg(long = "max-weight", default_value_t = 30)]
        max_weight: u64,
        #[command(flatten)]
        shared: Shared,
    },
    /// Run a named experiment into --out (a directory).
    Run {
        name: String,
        #[arg(long)]
        extended: bool,
        #[arg(long)]
        curve: bool,
        #[arg(long = "rfc-trees")]
        rfc_trees: Option<usize>,
        #[command(flatten)]
        shared: Shared,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Min,
    Max,
}

fn parse_window(s: &str) -> std::result::Result<Window, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, stride] = parts.as_slice() else {
        return Err("expected LO:HI:STRIDE".into());
    };
    let n = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
    let w = Window { lo: n(lo)?, hi: n(hi)?, stride: n(stride)? };
    if w.stride == 0 || w.lo > w.hi {
        return Err("need LO <= HI and STRIDE > 0".into());
    }
    Ok(w)
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    match out {
        Some(p) => save_json(p, value),
        None => {
            let text = serde_json::to_string_pretty(value)?;
            match writeln!(std::io::stdout().lock(), "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

fn need_out(s: &Shared) -> Result<&Path> {
    s.out.as_deref().ok_or_else(|| Error::Invalid("--out is required".into()))
}

fn generate(family: Family, s: &Shared) -> Result<()> {
    let count = s.count.unwrap_or(1000);
    let (dmin, dmax) = match family {
        Family::Wps => (s.dim_min.unwrap_or(3), s.dim_max.unwrap_or(10)),
        Family::Rank2 => (s.dim_min.unwrap_or(2), s.dim_max.unwrap_or(10)),
    };
    let seed = s.seed.unwrap_or(0);
    let varieties: Vec<Variety> = match family {
        Family::Wps => {
            let (items, rep) = batch::gen_wps(&GenConfig::wps(count, dmin, dmax, seed))?;
            batch::require_count(items, &rep, count)?.into_iter().map(Variety::Wps).collect()
        }
        Family::Rank2 => {
            let (items, rep) = batch::gen_rank2(&GenConfig::rank2(count, dmin, dmax, seed))?;
            batch::require_count(items, &rep, count)?.into_iter().map(Variety::Rank2).collect()
        }
    };
    write_varieties(need_out(s)?, &varieties)?;
    eprintln!("wrote {} varieties", varieties.len());
    Ok(())
}

fn feature_params(v: &Variety, s: &Shared) -> FeatureParams {
    let mut p = match v {
        Variety::Wps(_) => FeatureParams::wps_desk(),
        Variety::Rank2(_) => FeatureParams::rank2_full(),
    };
    if let (Some(w), Variety::Rank2(_)) = (s.window, v) {
        p = p.with_window(w);
    }
    if let Some(d) = s.dmax {
        p.d_max = d;
    }
    p
}

fn features(input: &Path, csv: Option<&Path>, s: &Shared) -> Result<()> {
    let vs = read_varieties(input)?;
    let Some(first) = vs.first() else {
        return Err(Error::Invalid("no varieties in input".into()));
    };
    let params = feature_params(first, s);
    let mut records = Vec::new();
    let mut failed = 0;
    for r in batch::compute_records(&vs, &params) {
        match r {
            Ok(rec) if s.filter_se.is_none_or(|t| rec.se_int < t) => records.push(rec),
            Ok(_) => {}
            Err(_) => failed += 1,
        }
    }
    write_dataset(need_out(s)?, &records)?;
    if let Some(c) = csv {
        write_features_csv(c, &records)?;
    }
    eprintln!("wrote {} records ({} failed)", records.len(), failed);
    Ok(())
}

fn train(input: &Path, s: &Shared) -> Result<()> {
    let records = read_dataset(input)?;
    let kind: ModelKind = s.model.unwrap_or(ModelArg::Svm).into();
    let family = match records.first().map(|r| &r.variety) {
        Some(Variety::Wps(_)) => Family::Wps,
        Some(Variety::Rank2(_)) => Family::Rank2,
        None => return Err(Error::Invalid("empty dataset".into())),
    };
    let spec = kind.spec(family, 300);
    let seed = s.seed.unwrap_or(0);
    let frac = s.train_frac.unwrap_or(if family == Family::Wps { 0.1 } else { 0.7 });
    let kept: Vec<_> = records.into_iter().filter(|r| s.filter_se.is_none_or(|t| r.se_int < t)).collect();
    let t = train_and_evaluate(&kept, &spec, kind.uses_prefix(), frac, seed)?;
    save_model(need_out(s)?, &ModelFile::new(spec, kind.n_features(), seed, t.model))?;
    eprintln!("trained on {}, validation accuracy {:.4} on {}", t.n_train, t.report.accuracy, t.n_val);
    Ok(())
}

fn eval(input: &Path, model_file: &Path, s: &Shared) -> Result<()> {
    let m = load_model(model_file)?;
    let records = read_dataset(input)?;
    let kept: Vec<_> = records.into_iter().filter(|r| s.filter_se.is_none_or(|t| r.se_int < t)).collect();
    let (x, y) = batch::design(&kept, m.n_features == 102)?;
    let (x, y, seed) = match s.train_frac {
        Some(f) => {
            let seed = s.seed.unwrap_or(m.seed);
            let (_, va) = train_test_split(x.len(), f, seed);
            let (xv, yv) = select_rows(&x, &y, &va);
            (xv, yv, Some(seed))
        }
        None => (x, y, None),
    };
    let report = m.model.evaluate(&x, &y, seed)?;
    emit_json(s.out.as_deref(), &report)
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::GenWps(s) => generate(Family::Wps, &s),
        Cmd::GenRank2(s) => generate(Family::Rank2, &s),
        Cmd::Periods { variety, shared } => {
            let v = Variety::parse(&variety)?;
            let seq = batch::log_coeffs(&v, shared.dmax.unwrap_or(feature_params(&v, &shared).d_max));
            write_log_coeffs_csv(need_out(&shared)?, &seq)
        }
        Cmd::Features { input, csv, shared } => features(&input, csv.as_deref(), &shared),
        Cmd::Asympt { variety, shared } => {
            let asy = match Variety::parse(&variety)? {
                Variety::Wps(w) => wps_asymptotics(&w),
                Variety::Rank2(w) => rank2_asymptotics(&w)?,
            };
            emit_json(shared.out.as_deref(), &asy)
        }
        Cmd::Train { input, shared } => train(&input, &shared),
        Cmd::Eval { input, model_file, shared } => eval(&input, &model_file, &shared),
        Cmd::Bounds { theta, n, mode, eps, shared } => {
            let mode = match mode {
                ModeArg::Min => BoundMode::Min,
                ModeArg::Max => BoundMode::Max,
            };
            emit_json(shared.out.as_deref(), &cluster_bound(theta, n, mode, eps)?)
        }
        Cmd::VerifyOutlier { extended, shared } => emit_json(shared.out.as_deref(), &outlier_report(extended)?),
        Cmd::EnumerateDim3 { max_weight, shared } => {
            emit_json(shared.out.as_deref(), &enumerate_dim3_report(&[max_weight])?)
        }
        Cmd::Run { name, extended, curve, rfc_trees, shared } => {
            let o = Overrides {
                seed: shared.seed,
                count: shared.count,
                dim_min: shared.dim_min,
                dim_max: shared.dim_max,
                d_max: shared.dmax,
                window: shared.window,
                filter_se: shared.filter_se,
                train_frac: shared.train_frac,
                rfc_trees,
                extended,
                curve,
            };
            let out = shared.out.unwrap_or_else(|| PathBuf::from(format!("out/{name}")));
            for f in run_experiment(&name, &o, &out)? {
                println!("{}", f.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
