use num_bigint::BigInt;
use proptest::prelude::*;
use qperiod_core::lattice::{
    hermite_normal_form, hull_lattice_points, kernel_basis, simplex_lattice_points, smith_normal_form, IntMatrix,
};

fn big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn matrix(rows: usize, cols: usize, data: &[i64]) -> IntMatrix {
    IntMatrix::new(rows, cols, big(data)).unwrap()
}

fn arb_matrix(max_rows: usize, max_cols: usize, bound: i64) -> impl Strategy<Value = IntMatrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(move |(r, c)| {
        proptest::collection::vec(-bound..=bound, r * c).prop_map(move |d| matrix(r, c, &d))
    })
}

/// Random unimodular matrix as a product of elementary row operations.
fn unimodular(n: usize, ops: &[(usize, usize, i64)]) -> IntMatrix {
    let mut rows: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    for &(i, j, k) in ops {
        let (i, j) = (i % n, j % n);
        if i == j {
            rows[i].iter_mut().for_each(|x| *x = -*x);
        } else {
            for c in 0..n {
                rows[i][c] += k * rows[j][c];
            }
        }
    }
    IntMatrix::from_rows(&rows).unwrap()
}

fn apply(u: &IntMatrix, v: &[BigInt]) -> Vec<BigInt> {
    (0..u.rows()).map(|i| u.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// Brute-force count of lattice points in `conv(0, rays)` by solving the
/// barycentric system with exact rational arithmetic over the bounding box.
fn brute_simplex_count(rays: &[Vec<i64>]) -> usize {
    let n = rays.len();
    let lo: Vec<i64> = (0..n).map(|c| rays.iter().map(|r| r[c]).min().unwrap().min(0)).collect();
    let hi: Vec<i64> = (0..n).map(|c| rays.iter().map(|r| r[c]).max().unwrap().max(0)).collect();
    // rays as columns of M; x in simplex iff lambda = M^-1 x has lambda >= 0 and sum <= 1.
    let m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| rays[j][i] as f64).collect()).collect();
    let inv = invert(&m);
    let mut count = 0;
    let mut p = lo.clone();
    loop {
        let lam: Vec<f64> = (0..n).map(|i| (0..n).map(|j| inv[i][j] * p[j] as f64).sum()).collect();
        if lam.iter().all(|&l| l >= -1e-9) && lam.iter().sum::<f64>() <= 1.0 + 1e-9 {
            count += 1;
        }
        let mut c = 0;
        loop {
            if c == n {
                return count;
            }
            if p[c] < hi[c] {
                p[c] += 1;
                break;
            }
            p[c] = lo[c];
            c += 1;
        }
    }
}

fn invert(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| r.iter().copied().chain((0..n).map(|j| f64::from(u8::from(i == j)))).collect())
        .collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
        a.swap(c, p);
        let d = a[c][c];
        a[c].iter_mut().for_each(|x| *x /= d);
        for r in 0..n {
            if r != c {
                let f = a[r][c];
                for k in 0..2 * n {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    a.into_iter().map(|r| r[n..].to_vec()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hnf_transform_is_unimodular(m in arb_matrix(4, 5, 6)) {
        let (h, u) = hermite_normal_form(&m);
        prop_assert_eq!(u.mul(&m).unwrap(), h);
        let det = u.determinant().unwrap();
        prop_assert!(det == BigInt::from(1) || det == BigInt::from(-1));
    }

    #[test]
    fn snf_is_a_divisibility_chain(m in arb_matrix(4, 4, 6)) {
        let (d, u, v) = smith_normal_form(&m);
        prop_assert_eq!(u.mul(&m).unwrap().mul(&v).unwrap(), d.clone());
        let diag: Vec<BigInt> = (0..d.rows().min(d.cols())).map(|i| d.get(i, i).clone()).collect();
        for pair in diag.windows(2) {
            if pair[0] == BigInt::from(0) {
                prop_assert_eq!(&pair[1], &BigInt::from(0));
            } else {
                prop_assert_eq!(&pair[1] % &pair[0], BigInt::from(0));
            }
        }
        for i in 0..d.rows() {
            for j in 0..d.cols() {
                if i != j {
                    prop_assert_eq!(d.get(i, j), &BigInt::from(0));
                }
            }
        }
    }

    #[test]
    fn kernel_is_saturated(top in proptest::collection::vec(0i64..6, 5), bottom in proptest::collection::vec(0i64..6, 5)) {
        let w = IntMatrix::from_rows(&[top, bottom]).unwrap();
        prop_assume!(hermite_normal_form(&w).0.rows() == 2 && !hermite_normal_form(&w).0.is_zero_row(1));
        let k = kernel_basis(&w).unwrap();
        prop_assert_eq!(k.rows(), 3);
        prop_assert!(w.mul(&k.transpose()).unwrap().entries().iter().all(|x| *x == BigInt::from(0)));
        let (d, _, _) = smith_normal_form(&k);
        for i in 0..3 {
            prop_assert_eq!(d.get(i, i), &BigInt::from(1));
        }
    }

    #[test]
    fn simplex_points_match_brute_force(dim in 2usize..=3, data in proptest::collection::vec(-4i64..=4, 9)) {
        let rays: Vec<Vec<i64>> = (0..dim).map(|i| data[i * dim..(i + 1) * dim].to_vec()).collect();
        let m = IntMatrix::from_rows(&rays).unwrap();
        prop_assume!(m.determinant().unwrap() != BigInt::from(0));
        let fast = simplex_lattice_points(&rays.iter().map(|r| big(r)).collect::<Vec<_>>()).unwrap();
        prop_assert_eq!(fast.len(), brute_simplex_count(&rays));
    }

    #[test]
    fn hull_points_are_invariant(
        extra in proptest::collection::vec((-2i64..=2, -2i64..=2, -2i64..=2), 0..3),
        ops in proptest::collection::vec((0usize..3, 0usize..3, -2i64..=2), 0..6),
        shuffle in proptest::collection::vec(0usize..100, 8),
    ) {
        // A cross-polytope always has the origin in its interior.
        let mut verts: Vec<Vec<i64>> = vec![
            vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![-1, -1, -1],
        ];
        verts.extend(extra.iter().map(|&(a, b, c)| vec![a, b, c]).filter(|v| v.iter().any(|&x| x != 0)));
        verts.sort();
        verts.dedup();
        let base: Vec<Vec<BigInt>> = verts.iter().map(|v| big(v)).collect();
        let count = hull_lattice_points(&base).unwrap().len();

        let mut permuted = base.clone();
        for (i, s) in shuffle.iter().enumerate().take(permuted.len()) {
            let j = s % permuted.len();
            permuted.swap(i, j);
        }
        prop_assert_eq!(hull_lattice_points(&permuted).unwrap().len(), count);

        let u = unimodular(3, &ops);
        let moved: Vec<Vec<BigInt>> = base.iter().map(|v| apply(&u, v)).collect();
        prop_assert_eq!(hull_lattice_points(&moved).unwrap().len(), count);
    }
}
