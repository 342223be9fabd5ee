use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use super::{dot, integer_kernel, smith_normal_form, IntMatrix};
use crate::{Error, Result};

/// Sorted, duplicate-free set of lattice points of a fixed dimension.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LatticePointSet {
    dim: usize,
    points: BTreeSet<Vec<BigInt>>,
}

impl LatticePointSet {
    pub fn new(dim: usize) -> Self {
        LatticePointSet { dim, points: BTreeSet::new() }
    }

    pub fn from_points(dim: usize, points: impl IntoIterator<Item = Vec<BigInt>>) -> Result<Self> {
        let mut set = LatticePointSet::new(dim);
        for p in points {
            set.insert(p)?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, p: Vec<BigInt>) -> Result<bool> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch(alloc::format!(
                "point of length {} in dimension {}",
                p.len(),
                self.dim
            )));
        }
        Ok(self.points.insert(p))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &[BigInt]) -> bool {
        self.points.contains(p)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<BigInt>> {
        self.points.iter()
    }

    fn extend(&mut self, other: LatticePointSet) {
        self.points.extend(other.points);
    }
}

/// A facet `{x : <normal, x> = offset}` of a polytope lying in
/// `<normal, x> <= offset`, with `normal` primitive and `offset > 0`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Facet {
    pub normal: Vec<BigInt>,
    pub offset: BigInt,
    /// Indices of the input vertices lying on the facet, ascending.
    pub vertices: Vec<usize>,
}

pub(crate) struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

pub(crate) fn combinations(n: usize, k: usize) -> Combinations {
    Combinations { n, idx: (0..k).collect(), done: k > n }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

fn check_dims(vertices: &[Vec<BigInt>]) -> Result<usize> {
    let n = vertices.first().map(Vec::len).ok_or(Error::EmptyMatrix)?;
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    if vertices.iter().any(|v| v.len() != n) {
        return Err(Error::DimensionMismatch("vertices of unequal length".into()));
    }
    Ok(n)
}

/// Facets of the convex hull of `vertices`, found by brute force over all
/// `n`-subsets. The origin must lie strictly inside the hull.
pub fn facets(vertices: &[Vec<BigInt>]) -> Result<Vec<Facet>> {
    let n = check_dims(vertices)?;
    let mut found: BTreeSet<Facet> = BTreeSet::new();
    for subset in combinations(vertices.len(), n) {
        let rows: Vec<Vec<BigInt>> = subset
            .iter()
            .map(|&i| {
                let mut r = vertices[i].clone();
                r.push(BigInt::from(-1));
                r
            })
            .collect();
        let Some(k) = integer_kernel(&IntMatrix::from_big_rows(&rows)?) else {
            continue;
        };
        if k.rows() != 1 {
            continue;
        }
        let mut normal = k.row(0).to_vec();
        let mut offset = normal.pop().expect("n + 1 entries");
        let slack: Vec<BigInt> = vertices.iter().map(|v| dot(&normal, v) - &offset).collect();
        let pos = slack.iter().any(Signed::is_positive);
        let neg = slack.iter().any(Signed::is_negative);
        if !pos && !neg {
            return Err(Error::FanNotComplete);
        }
        if pos && neg {
            continue;
        }
        if pos {
            normal.iter_mut().for_each(|x| *x = -core::mem::take(x));
            offset = -offset;
        }
        if !offset.is_positive() {
            return Err(Error::FanNotComplete);
        }
        let on: Vec<usize> = (0..vertices.len()).filter(|&i| slack[i].is_zero()).collect();
        found.insert(Facet { normal, offset, vertices: on });
    }
    if found.len() <= n {
        return Err(Error::FanNotComplete);
    }
    Ok(found.into_iter().collect())
}

/// Visits the nonzero box elements of the simplex `conv(0, rays)` with
/// barycentric sum at most one, i.e. its lattice points other than the
/// origin and the rays. `rays` must be linearly independent.
fn visit_simplex_interior(
    rays: &[Vec<BigInt>],
    mut visit: impl FnMut(Vec<BigInt>) -> ControlFlow<()>,
) -> Result<ControlFlow<()>> {
    let n = rays.len();
    let v = IntMatrix::from_columns(rays)?;
    if v.rows() != n {
        return Err(Error::DimensionMismatch("simplex needs n rays in dimension n".into()));
    }
    let (d, _u, w) = smith_normal_form(&v);
    let diag: Vec<BigInt> = (0..n).map(|i| d.get(i, i).clone()).collect();
    if diag.iter().any(Zero::is_zero) {
        return Err(Error::NonSimplicialCone);
    }
    let l = diag[n - 1].clone();
    // coef[i][j] = W_ij * (L / d_j) mod L, so q_i * L = sum_j coef[i][j] g_j mod L
    let coef: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| (w.get(i, j) * (&l / &diag[j])).mod_floor(&l)).collect())
        .collect();
    let radix: Vec<u64> = diag
        .iter()
        .map(|x| x.to_u64().ok_or_else(|| Error::InvalidArgument("simplex volume too large".into())))
        .collect::<Result<_>>()?;
    let mut g = alloc::vec![0u64; n];
    loop {
        // advance the mixed-radix counter; the all-zero element is the origin
        let mut j = 0;
        while j < n {
            g[j] += 1;
            if g[j] < radix[j] {
                break;
            }
            g[j] = 0;
            j += 1;
        }
        if j == n {
            return Ok(ControlFlow::Continue(()));
        }
        let num: Vec<BigInt> = (0..n)
            .map(|i| {
                let s: BigInt = (0..n).map(|j| &coef[i][j] * g[j]).sum();
                s.mod_floor(&l)
            })
            .collect();
        let total: BigInt = num.iter().sum();
        if total > l {
            continue;
        }
        let point: Vec<BigInt> = (0..n)
            .map(|k| {
                let s: BigInt = (0..n).map(|i| &rays[i][k] * &num[i]).sum();
                debug_assert!(s.is_multiple_of(&l));
                s / &l
            })
            .collect();
        if visit(point).is_break() {
            return Ok(ControlFlow::Break(()));
        }
    }
}

/// All lattice points of the simplex `conv(0, rays)`, origin and rays included.
pub fn simplex_lattice_points(rays: &[Vec<BigInt>]) -> Result<LatticePointSet> {
    let n = check_dims(rays)?;
    let mut set = LatticePointSet::new(n);
    set.insert(alloc::vec![BigInt::zero(); n])?;
    for r in rays {
        set.insert(r.clone())?;
    }
    let _ = visit_simplex_interior(rays, |p| {
        set.points.insert(p);
        ControlFlow::Continue(())
    })?;
    Ok(set)
}

/// Simplices `conv(0, S)` covering the cone over one facet. Simplicial facets
/// give themselves; otherwise every independent `n`-subset of the facet's
/// vertices through its smallest vertex is used, a superset of the pulling
/// triangulation from that vertex.
fn facet_simplices(vertices: &[Vec<BigInt>], facet: &Facet, n: usize) -> Vec<Vec<Vec<BigInt>>> {
    let on = &facet.vertices;
    if on.len() == n {
        return alloc::vec![on.iter().map(|&i| vertices[i].clone()).collect()];
    }
    let mut sorted: Vec<&Vec<BigInt>> = on.iter().map(|&i| &vertices[i]).collect();
    sorted.sort();
    let apex = sorted[0];
    let rest = &sorted[1..];
    combinations(rest.len(), n - 1)
        .filter_map(|sub| {
            let mut s: Vec<Vec<BigInt>> = alloc::vec![apex.clone()];
            s.extend(sub.iter().map(|&i| rest[i].clone()));
            let m = IntMatrix::from_big_rows(&s).ok()?;
            (!m.determinant().ok()?.is_zero()).then_some(s)
        })
        .collect()
}

/// All lattice points of the convex hull of `vertices`, which must contain
/// the origin in its interior.
pub fn hull_lattice_points(vertices: &[Vec<BigInt>]) -> Result<LatticePointSet> {
    let n = check_dims(vertices)?;
    let mut set = LatticePointSet::new(n);
    for facet in facets(vertices)? {
        for simplex in facet_simplices(vertices, &facet, n) {
            set.extend(simplex_lattice_points(&simplex)?);
        }
    }
    Ok(set)
}

/// Whether the hull of `vertices` contains a lattice point other than the
/// origin and the vertices themselves. Stops at the first such point.
pub fn hull_has_extra_points(vertices: &[Vec<BigInt>]) -> Result<bool> {
    let n = check_dims(vertices)?;
    for facet in facets(vertices)? {
        for simplex in facet_simplices(vertices, &facet, n) {
            if visit_simplex_interior(&simplex, |_| ControlFlow::Break(()))?.is_break() {
                return Ok(true);
            }
        }
    }
    Ok(false)
}
