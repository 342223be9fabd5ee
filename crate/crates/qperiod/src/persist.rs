//! Model files, JSON reports and CSV emitters.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use qperiod_core::learn::{CurvePoint, Model, ModelSpec};
use qperiod_core::periods::PeriodSequence;
use serde::{Deserialize, Serialize};

use crate::dataset::{fmt_f64, DatasetRecord};
use crate::error::{Error, Result};

pub const MODEL_FORMAT: &str = "qperiod-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    /// 2 for `(slope, intercept)`, 102 with the log-coefficient prefix.
    pub n_features: usize,
    pub spec: ModelSpec,
    pub seed: u64,
    pub model: Model,
}

impl ModelFile {
    pub fn new(spec: ModelSpec, n_features: usize, seed: u64, model: Model) -> Self {
        ModelFile { format: MODEL_FORMAT.into(), version: MODEL_VERSION, n_features, spec, seed, model }
    }
}

pub fn save_model(path: impl AsRef<Path>, m: &ModelFile) -> Result<()> {
    save_json(path, m)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelFile> {
    let m: ModelFile = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    if m.format != MODEL_FORMAT {
        return Err(Error::ModelFile(format!("format is `{}`, expected `{MODEL_FORMAT}`", m.format)));
    }
    if m.version != MODEL_VERSION {
        return Err(Error::ModelFile(format!("version {} is not supported (expected {MODEL_VERSION})", m.version)));
    }
    Ok(m)
}

pub fn save_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// `kind,dim,slope,intercept,se_slope,se_int`, one row per record.
pub fn write_features_csv(path: impl AsRef<Path>, records: &[DatasetRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["kind", "dim", "slope", "intercept", "se_slope", "se_int"])?;
    for r in records {
        w.write_record([
            r.variety.kind().to_string(),
            r.dim.to_string(),
            fmt_f64(r.slope),
            fmt_f64(r.intercept),
            fmt_f64(r.se_slope),
            fmt_f64(r.se_int),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `d,log_c_d` for the nonzero coefficients.
pub fn write_log_coeffs_csv(path: impl AsRef<Path>, seq: &PeriodSequence) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["d", "log_c_d"])?;
    for (d, v) in seq.nonzero_points(0, seq.d_max()) {
        w.write_record([d.to_string(), fmt_f64(v)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_curve_csv(path: impl AsRef<Path>, curve: &[CurvePoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["train_frac", "train_mean", "train_sd", "val_mean", "val_sd"])?;
    for p in curve {
        w.write_record([p.train_frac, p.train_mean, p.train_sd, p.val_mean, p.val_sd].map(fmt_f64))?;
    }
    w.flush()?;
    Ok(())
}
