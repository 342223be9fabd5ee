use std::io;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] qperiod_core::Error),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: missing key `{key}`")]
    MissingKey { line: usize, key: &'static str },
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("model file: {0}")]
    ModelFile(String),
    #[error("unknown experiment `{name}`, expected one of: {known}")]
    UnknownExperiment { name: String, known: String },
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
