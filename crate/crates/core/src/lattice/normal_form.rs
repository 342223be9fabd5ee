use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::IntMatrix;
use crate::{Error, Result};

/// Row-style Hermite normal form: returns `(h, u)` with `u` unimodular and
/// `h = u * m` upper echelon, positive pivots and entries above each pivot
/// reduced into `[0, pivot)`. Zero rows come last.
pub fn hermite_normal_form(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let mut h = m.clone();
    let mut u = IntMatrix::identity(m.rows());
    let rows = m.rows();
    let mut p = 0;
    for j in 0..m.cols() {
        if p == rows {
            break;
        }
        for i in p + 1..rows {
            if h.get(i, j).is_zero() {
                continue;
            }
            if h.get(p, j).is_zero() {
                h.swap_rows(p, i);
                u.swap_rows(p, i);
                continue;
            }
            let x = h.get(p, j).clone();
            let y = h.get(i, j).clone();
            let e = x.extended_gcd(&y);
            let ny = -(&y / &e.gcd);
            let nx = &x / &e.gcd;
            h.combine_rows(p, i, [&e.x, &e.y, &ny, &nx]);
            u.combine_rows(p, i, [&e.x, &e.y, &ny, &nx]);
        }
        if h.get(p, j).is_zero() {
            continue;
        }
        if h.get(p, j).is_negative() {
            h.negate_row(p);
            u.negate_row(p);
        }
        let pivot = h.get(p, j).clone();
        for i in 0..p {
            let q = h.get(i, j).div_floor(&pivot);
            h.sub_row_multiple(i, p, &q);
            u.sub_row_multiple(i, p, &q);
        }
        p += 1;
    }
    (h, u)
}

/// Smith normal form: returns `(d, u, v)` with `d = u * m * v` diagonal,
/// non-negative, each diagonal entry dividing the next.
pub fn smith_normal_form(m: &IntMatrix) -> (IntMatrix, IntMatrix, IntMatrix) {
    let mut d = m.clone();
    let mut u = IntMatrix::identity(m.rows());
    let mut v = IntMatrix::identity(m.cols());
    let (rows, cols) = (m.rows(), m.cols());
    for t in 0..rows.min(cols) {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    let x = d.get(i, j);
                    if !x.is_zero()
                        && best.is_none_or(|(bi, bj)| x.abs() < d.get(bi, bj).abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return (d, u, v);
            };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);
            let pivot = d.get(t, t).clone();
            let mut clean = true;
            for i in t + 1..rows {
                let q = d.get(i, t) / &pivot;
                d.sub_row_multiple(i, t, &q);
                u.sub_row_multiple(i, t, &q);
                clean &= d.get(i, t).is_zero();
            }
            for j in t + 1..cols {
                let q = d.get(t, j) / &pivot;
                d.sub_col_multiple(j, t, &q);
                v.sub_col_multiple(j, t, &q);
                clean &= d.get(t, j).is_zero();
            }
            if !clean {
                continue;
            }
            let offender = (t + 1..rows)
                .find(|&i| (t + 1..cols).any(|j| !d.get(i, j).is_multiple_of(&pivot)));
            match offender {
                Some(i) => {
                    let minus_one = BigInt::from(-1);
                    d.sub_row_multiple(t, i, &minus_one);
                    u.sub_row_multiple(t, i, &minus_one);
                }
                None => break,
            }
        }
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    (d, u, v)
}

/// Basis of the integer kernel `{x : m x = 0}` as the rows of a matrix, in
/// Hermite normal form. `None` when the kernel is trivial.
pub fn integer_kernel(m: &IntMatrix) -> Option<IntMatrix> {
    let (h, u) = hermite_normal_form(&m.transpose());
    let rank = (0..h.rows()).filter(|&i| !h.is_zero_row(i)).count();
    if rank == m.cols() {
        return None;
    }
    let k = u.select_rows(rank..m.cols()).expect("non-empty");
    Some(hermite_normal_form(&k).0)
}

/// Saturated kernel basis of a full-rank `r x N` weight matrix, as the rows of
/// an `(N - r) x N` matrix.
pub fn kernel_basis(w: &IntMatrix) -> Result<IntMatrix> {
    let (h, _) = hermite_normal_form(&w.transpose());
    let rank = (0..h.rows()).filter(|&i| !h.is_zero_row(i)).count();
    if rank < w.rows() {
        return Err(Error::DegenerateWeightMatrix);
    }
    integer_kernel(w).ok_or(Error::DegenerateWeightMatrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn hnf_basic() {
        let a = m(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
        let (h, u) = hermite_normal_form(&a);
        assert_eq!(u.mul(&a).unwrap(), h);
        assert_eq!(h, m(&[&[2, 4, 4], &[0, 6, 0], &[0, 0, 12]]));
        assert_eq!(u.determinant().unwrap().abs(), BigInt::from(1));
    }

    #[test]
    fn snf_basic() {
        let a = m(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]);
        let (d, u, v) = smith_normal_form(&a);
        assert_eq!(u.mul(&a).unwrap().mul(&v).unwrap(), d);
        let diag: Vec<i64> = (0..3).map(|i| i64::try_from(d.get(i, i)).unwrap()).collect();
        assert_eq!(diag, [2, 6, 12]);
    }

    #[test]
    fn kernel_examples() {
        let w = m(&[&[1, 1, 0, 0], &[0, 0, 1, 1]]);
        assert_eq!(kernel_basis(&w).unwrap(), m(&[&[1, -1, 0, 0], &[0, 0, 1, -1]]));
        let w = m(&[&[1, 1], &[0, 1]]);
        assert_eq!(kernel_basis(&w), Err(Error::DegenerateWeightMatrix));
        let w = m(&[&[1, 2, 3], &[2, 4, 6]]);
        assert_eq!(kernel_basis(&w), Err(Error::DegenerateWeightMatrix));
        let w = m(&[&[2, 2, 4]]);
        let k = kernel_basis(&w).unwrap();
        assert_eq!(k.rows(), 2);
        assert!(w.mul(&k.transpose()).unwrap().entries().iter().all(Zero::is_zero));
    }
}
