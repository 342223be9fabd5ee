//! Regularized quantum periods of weighted projective spaces and toric
//! varieties of Picard rank two, together with everything needed to turn
//! them into a dimension classifier: exact lattice machinery for the
//! terminality tests and fan normal forms, log-space period coefficients,
//! closed-form growth asymptotics, regression features and from-scratch
//! classifiers.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! parallel batch drivers live in the `qperiod` companion crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod asymptotics;
mod error;
pub mod features;
pub mod generate;
pub mod lattice;
pub mod learn;
pub mod math;
pub mod periods;
pub mod terminality;
pub mod varieties;

pub use error::{Error, Result};
