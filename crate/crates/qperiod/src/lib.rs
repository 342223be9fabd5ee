//! File formats, parallel batch processing and experiment drivers on top of
//! `qperiod-core`.

pub mod batch;
pub mod dataset;
mod error;
pub mod experiments;
pub mod persist;

pub use error::{Error, Result};
pub use qperiod_core;
