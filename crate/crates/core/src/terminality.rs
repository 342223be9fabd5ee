//! Terminality tests for both families, rank-two fans and canonical fan keys.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::lattice::{facets, hermite_normal_form, hull_has_extra_points, kernel_basis, make_primitive, IntMatrix};
use crate::varieties::{WeightMatrix, WeightVector};
use crate::{Error, Result};

/// Necessary condition for terminality: `a_i (N - i + 2) < a` for
/// `i = 3..=N` (1-based, weights ascending).
pub fn wps_bound_check(w: &WeightVector) -> bool {
    let n = w.len() as u64;
    let a = w.total();
    w.weights().iter().enumerate().skip(2).all(|(i, &ai)| ai * (n - i as u64 + 1) < a)
}

/// Exact terminality criterion for weighted projective spaces of dimension
/// at least two.
pub fn wps_is_terminal(w: &WeightVector) -> Result<bool> {
    if w.dimension() < 2 {
        return Err(Error::DimensionTooSmall(w.dimension()));
    }
    let a = w.total();
    let n = w.len() as u64;
    for k in 2..a.saturating_sub(1) {
        let s: u64 = w.weights().iter().map(|&ai| (k * ai) % a).sum();
        if !s.is_multiple_of(a) || s < 2 * a || s > (n - 2) * a {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The complete fan of a rank-two weight matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FanData {
    /// `(N - 2) x N`, column `i` is the ray of coordinate `i`.
    pub rays: IntMatrix,
    /// Each maximal cone as the ascending list of its ray indices.
    pub maximal_cones: Vec<Vec<usize>>,
    /// `|det|` of each maximal cone, aligned with `maximal_cones`.
    pub cone_dets: Vec<BigInt>,
}

impl FanData {
    pub fn dim(&self) -> usize {
        self.rays.rows()
    }

    pub fn ray_vectors(&self) -> Vec<Vec<BigInt>> {
        self.rays.columns()
    }
}

/// Builds the fan: rays are the primitive columns of the saturated kernel of
/// `w`, maximal cones omit one index from `I-` and one from `I+`.
pub fn rank2_fan(w: &WeightMatrix) -> Result<FanData> {
    weight_fan(&w.to_int_matrix())
}

/// The fan of any integer `2 x N` matrix whose column sum is parallel to no
/// column and has columns on both sides. Left multiplication by `GL(2, Z)`
/// does not change it.
pub fn weight_fan(w: &IntMatrix) -> Result<FanData> {
    if w.rows() != 2 {
        return Err(Error::DimensionMismatch("weight matrix needs two rows".into()));
    }
    let n = w.cols();
    let a: BigInt = (0..n).map(|i| w.get(0, i).clone()).sum();
    let b: BigInt = (0..n).map(|i| w.get(1, i).clone()).sum();
    let cross: Vec<BigInt> = (0..n).map(|i| &a * w.get(1, i) - &b * w.get(0, i)).collect();
    if cross.iter().any(Zero::is_zero) {
        return Err(Error::ParallelColumn);
    }
    let plus: Vec<usize> = (0..n).filter(|&i| cross[i].is_positive()).collect();
    let minus: Vec<usize> = (0..n).filter(|&i| cross[i].is_negative()).collect();
    if plus.is_empty() || minus.is_empty() {
        return Err(Error::SplitTooSmall { plus: plus.len(), minus: minus.len() });
    }
    let k = kernel_basis(w)?;
    let mut columns = Vec::with_capacity(n);
    for c in k.columns() {
        match make_primitive(&c) {
            Ok(p) => columns.push(p),
            Err(Error::ZeroVector) => return Err(Error::FewerThanNRays),
            Err(e) => return Err(e),
        }
    }
    let distinct: BTreeSet<&Vec<BigInt>> = columns.iter().collect();
    if distinct.len() != columns.len() {
        return Err(Error::FewerThanNRays);
    }
    let rays = IntMatrix::from_columns(&columns)?;
    let mut maximal_cones = Vec::new();
    let mut cone_dets = Vec::new();
    for &i in &minus {
        for &j in &plus {
            let (lo, hi) = (i.min(j), i.max(j));
            let cone: Vec<usize> = (0..n).filter(|&t| t != lo && t != hi).collect();
            cone_dets.push(rays.select_columns(&cone).determinant()?.abs());
            maximal_cones.push(cone);
        }
    }
    Ok(FanData { rays, maximal_cones, cone_dets })
}

pub fn rank2_is_simplicial(f: &FanData) -> bool {
    f.maximal_cones.iter().all(|c| c.len() == f.dim()) && f.cone_dets.iter().all(|d| !d.is_zero())
}

/// True iff the fan is the face fan of the hull of its rays, so that every
/// maximal cone spans exactly one facet.
pub fn rank2_is_fano(f: &FanData) -> Result<bool> {
    let fs = facets(&f.ray_vectors())?;
    let cones: BTreeSet<&Vec<usize>> = f.maximal_cones.iter().collect();
    let spanned: BTreeSet<&Vec<usize>> = fs.iter().map(|x| &x.vertices).collect();
    Ok(fs.len() == f.maximal_cones.len() && cones == spanned)
}

/// True iff the hull of the rays holds no lattice points besides the origin
/// and the rays.
pub fn rank2_is_terminal(f: &FanData) -> Result<bool> {
    Ok(!hull_has_extra_points(&f.ray_vectors())?)
}

/// Vertex-facet pairing matrix of the hull of the rays: entry `[f][v]` is
/// `c_f - <u_f, v>` for the facet `<u_f, x> <= c_f`. Rows in facet order.
pub fn pairing_matrix(f: &FanData) -> Result<Vec<Vec<i64>>> {
    let rays = f.ray_vectors();
    let fs = facets(&rays)?;
    fs.iter()
        .map(|facet| {
            rays.iter()
                .map(|v| {
                    let s: BigInt =
                        &facet.offset - facet.normal.iter().zip(v).map(|(x, y)| x * y).sum::<BigInt>();
                    s.to_i64().ok_or_else(|| Error::InvalidArgument("pairing entry overflow".into()))
                })
                .collect()
        })
        .collect()
}

/// Cheap isomorphism invariant used to bucket fans before comparing keys.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FanInvariant {
    pub dim: usize,
    pub rays: usize,
    pub cone_dets: Vec<BigInt>,
    pub pairing_rows: Vec<Vec<i64>>,
}

pub fn fan_invariant(f: &FanData) -> Result<FanInvariant> {
    let mut cone_dets = f.cone_dets.clone();
    cone_dets.sort();
    let mut pairing_rows: Vec<Vec<i64>> = pairing_matrix(f)?
        .into_iter()
        .map(|mut r| {
            r.sort_unstable();
            r
        })
        .collect();
    pairing_rows.sort();
    Ok(FanInvariant { dim: f.dim(), rays: f.rays.cols(), cone_dets, pairing_rows })
}

/// Canonical identifier of a fan up to ray permutation and unimodular change
/// of basis, as lowercase hex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NormalFormKey(String);

impl NormalFormKey {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn from_bytes(bytes: &[u8]) -> Self {
        const HEX: &[u8; 16] = b"0123456789abcdef";
        let mut s = String::with_capacity(2 * bytes.len());
        for b in bytes {
            s.push(HEX[(b >> 4) as usize] as char);
            s.push(HEX[(b & 15) as usize] as char);
        }
        NormalFormKey(s)
    }
}

impl fmt::Display for NormalFormKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
struct SearchState {
    used: Vec<bool>,
    blocks: Vec<Vec<usize>>,
}

/// Column orders under which the pairing matrix, with a suitable row order,
/// is lexicographically maximal. Among rays that are interchangeable by a
/// symmetry of the lattice (twins) only orders keeping them ascending are
/// produced; the others give the same Hermite form.
fn maximizing_column_orders(pm: &[Vec<i64>], twin_class: &[usize]) -> Vec<Vec<usize>> {
    let n_cols = twin_class.len();
    let mut states = alloc::vec![SearchState {
        used: alloc::vec![false; pm.len()],
        blocks: alloc::vec![(0..n_cols).collect()],
    }];
    for _ in 0..pm.len() {
        let mut best: Option<Vec<i64>> = None;
        let mut next: BTreeSet<SearchState> = BTreeSet::new();
        for state in &states {
            for (f, row_f) in pm.iter().enumerate() {
                if state.used[f] {
                    continue;
                }
                let mut row = Vec::with_capacity(n_cols);
                let mut blocks = Vec::with_capacity(n_cols);
                for block in &state.blocks {
                    let mut cols = block.clone();
                    cols.sort_by(|&x, &y| row_f[y].cmp(&row_f[x]).then(x.cmp(&y)));
                    let mut start = 0;
                    for t in 1..=cols.len() {
                        if t == cols.len() || row_f[cols[t]] != row_f[cols[start]] {
                            blocks.push(cols[start..t].to_vec());
                            start = t;
                        }
                    }
                    row.extend(cols.iter().map(|&c| row_f[c]));
                }
                if !twins_ordered(&blocks, twin_class) {
                    continue;
                }
                let ord = best.as_ref().map_or(Ordering::Greater, |b| row.cmp(b));
                if ord == Ordering::Less {
                    continue;
                }
                if ord == Ordering::Greater {
                    best = Some(row);
                    next.clear();
                }
                let mut used = state.used.clone();
                used[f] = true;
                next.insert(SearchState { used, blocks });
            }
        }
        states = next.into_iter().collect();
    }
    states.into_iter().map(|s| s.blocks.concat()).collect()
}

fn twins_ordered(blocks: &[Vec<usize>], twin_class: &[usize]) -> bool {
    let mut block_of = alloc::vec![0usize; twin_class.len()];
    for (b, block) in blocks.iter().enumerate() {
        for &c in block {
            block_of[c] = b;
        }
    }
    // within a twin class, block positions must not decrease with the index
    let mut last: Vec<Option<usize>> = alloc::vec![None; twin_class.len()];
    for c in 0..twin_class.len() {
        let t = twin_class[c];
        if let Some(prev) = last[t] {
            if block_of[c] < prev {
                return false;
            }
        }
        last[t] = Some(block_of[c]);
    }
    true
}

fn serialize_hnf(h: &IntMatrix) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&(h.rows() as u32).to_be_bytes());
    out.extend_from_slice(&(h.cols() as u32).to_be_bytes());
    for x in h.entries() {
        let bytes = x.to_signed_bytes_be();
        out.push(bytes.len() as u8);
        out.extend_from_slice(&bytes);
    }
    out
}

/// Canonical key of a fan given the twin classes of its rays (rays `i`, `j`
/// in the same class when swapping them is induced by a lattice
/// automorphism). Passing all-distinct classes is always correct, just
/// slower on symmetric fans.
pub fn normal_form_key_with_twins(f: &FanData, twin_class: &[usize]) -> Result<NormalFormKey> {
    if twin_class.len() != f.rays.cols() {
        return Err(Error::DimensionMismatch("one twin class per ray".into()));
    }
    let pm = pairing_matrix(f)?;
    let mut best: Option<Vec<u8>> = None;
    for order in maximizing_column_orders(&pm, twin_class) {
        let (h, _) = hermite_normal_form(&f.rays.select_columns(&order));
        let bytes = serialize_hnf(&h);
        if best.as_ref().is_none_or(|b| bytes < *b) {
            best = Some(bytes);
        }
    }
    best.map(|b| NormalFormKey::from_bytes(&b)).ok_or(Error::FanNotComplete)
}

pub fn normal_form_key(f: &FanData) -> Result<NormalFormKey> {
    let classes: Vec<usize> = (0..f.rays.cols()).collect();
    normal_form_key_with_twins(f, &classes)
}

/// Key of the fan of a weight matrix.
pub fn rank2_normal_form_key(w: &WeightMatrix, f: &FanData) -> Result<NormalFormKey> {
    weight_normal_form_key(&w.to_int_matrix(), f)
}

/// Key of the fan of an integer weight matrix. Equal columns of `w` are
/// twins: the transposition fixes `w`, hence preserves the kernel lattice.
pub fn weight_normal_form_key(w: &IntMatrix, f: &FanData) -> Result<NormalFormKey> {
    let cols = w.columns();
    let classes: Vec<usize> =
        cols.iter().map(|c| cols.iter().position(|d| d == c).expect("present")).collect();
    normal_form_key_with_twins(f, &classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn wv(w: &[i64]) -> WeightVector {
        WeightVector::validate_wps(w).unwrap()
    }

    fn wm(top: &[i64], bottom: &[i64]) -> WeightMatrix {
        WeightMatrix::validate_rank2(top, bottom).unwrap()
    }

    #[test]
    fn wps_checks() {
        assert!(wps_bound_check(&wv(&[1, 1, 1, 2])));
        assert!(!wps_bound_check(&wv(&[1, 1, 2])));
        assert!(wps_bound_check(&wv(&[1, 1, 1, 1])));
        assert!(wps_is_terminal(&wv(&[1, 1, 1, 1])).unwrap());
        assert!(wps_is_terminal(&wv(&[1, 1, 1, 2])).unwrap());
        assert!(!wps_is_terminal(&wv(&[1, 1, 2])).unwrap());
        assert!(wps_is_terminal(&wv(&[1, 1, 1])).unwrap());
        assert_eq!(wps_is_terminal(&wv(&[1, 1])), Err(Error::DimensionTooSmall(1)));
    }

    #[test]
    fn p1xp1_fan() {
        let f = rank2_fan(&wm(&[1, 1, 0, 0], &[0, 0, 1, 1])).unwrap();
        let mut rays = f.ray_vectors();
        rays.sort();
        let expect: Vec<Vec<BigInt>> =
            [[-1, 0], [0, -1], [0, 1], [1, 0]].iter().map(|r| crate::lattice::to_big(r)).collect();
        assert_eq!(rays, expect);
        assert_eq!(f.maximal_cones.len(), 4);
        assert!(rank2_is_simplicial(&f));
        assert!(f.cone_dets.iter().all(|d| *d == BigInt::from(1)));
        assert!(rank2_is_terminal(&f).unwrap());
        assert!(rank2_is_fano(&f).unwrap());
    }

    #[test]
    fn hull_test_alone_admits_a_non_face_fan() {
        // rays e1, e2, e3, -(1,1,1), (2,3,1): the cone {e1, e2, (2,3,1)} is
        // not a facet of the hull
        let f = rank2_fan(&wm(&[3, 1, 3, 3, 0], &[1, 0, 2, 3, 1])).unwrap();
        assert!(rank2_is_simplicial(&f));
        assert!(rank2_is_terminal(&f).unwrap());
        assert!(!rank2_is_fano(&f).unwrap());
    }

    #[test]
    fn keys_separate_and_agree() {
        let a = wm(&[1, 1, 0, 0], &[0, 0, 1, 1]);
        let b = wm(&[0, 0, 1, 1], &[1, 1, 0, 0]);
        let c = wm(&[1, 0, 1, 0], &[0, 1, 0, 1]);
        let f1 = wm(&[1, 1, 1, 0], &[0, 1, 0, 1]);
        let key = |w: &WeightMatrix| rank2_normal_form_key(w, &rank2_fan(w).unwrap()).unwrap();
        assert_eq!(key(&a), key(&b));
        assert_eq!(key(&a), key(&c));
        assert_ne!(key(&a), key(&f1));
        let plain = normal_form_key(&rank2_fan(&a).unwrap()).unwrap();
        assert_eq!(plain, key(&a));
        let _ = vec![0];
    }
}
