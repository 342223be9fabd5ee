//! Exact integer linear algebra and lattice-point enumeration.
//!
//! Everything here works over arbitrary-precision integers: terminality
//! verdicts and fan normal forms must never depend on rounding.

mod matrix;
mod normal_form;
mod points;

pub use matrix::IntMatrix;
pub use normal_form::{hermite_normal_form, integer_kernel, kernel_basis, smith_normal_form};
pub use points::{
    facets, hull_has_extra_points, hull_lattice_points, simplex_lattice_points, Facet,
    LatticePointSet,
};

use alloc::vec::Vec;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use crate::{Error, Result};

/// Divides `v` by the gcd of its entries.
pub fn make_primitive(v: &[BigInt]) -> Result<Vec<BigInt>> {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return Err(Error::ZeroVector);
    }
    Ok(v.iter().map(|x| x / &g).collect())
}

pub(crate) fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
pub(crate) fn to_big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}
