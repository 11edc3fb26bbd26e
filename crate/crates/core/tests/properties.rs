use hkz_core::bounds::orthogonality_defect;
use hkz_core::experiments::random_gram;
use hkz_core::reduction::{hkz_reduce, is_hkz_reduced, shortest_vector, size_reduce};
use hkz_core::{GramMatrix, Rat, Unimodular};
use num::{One, Signed};
use proptest::prelude::*;

mod common;

fn gram(max_rank: usize) -> impl Strategy<Value = GramMatrix> {
    (1..=max_rank, any::<u64>(), 1i64..=8).prop_map(|(n, seed, b)| random_gram(n, seed, b).unwrap())
}

/// Product of elementary row operations `row_i += c row_j` and swaps.
fn unimodular(n: usize, ops: &[(usize, usize, i64, bool)]) -> Unimodular {
    let mut m: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| (i == j) as i64).collect())
        .collect();
    for &(i, j, c, swap) in ops {
        let (i, j) = (i % n, j % n);
        if i == j {
            continue;
        }
        if swap {
            m.swap(i, j);
        } else {
            for k in 0..n {
                m[i][k] += c * m[j][k];
            }
        }
    }
    Unimodular::from_ints(&m).unwrap()
}

fn ops() -> impl Strategy<Value = Vec<(usize, usize, i64, bool)>> {
    prop::collection::vec((0usize..6, 0usize..6, -2i64..=2, any::<bool>()), 0..8)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ldl_reconstructs_exactly(g in gram(6)) {
        let gso = g.ldl();
        prop_assert_eq!(gso.reconstruct(), g.entries().to_vec());
        prop_assert!(gso.bstar.iter().all(Signed::is_positive));
        prop_assert_eq!(gso.determinant(), g.determinant());
    }

    #[test]
    fn determinant_is_unimodular_invariant(g in gram(5), ops in ops()) {
        let u = unimodular(g.rank(), &ops);
        prop_assert!(common::det_is_unit(&u.determinant()));
        prop_assert_eq!(g.apply_unimodular(&u).unwrap().determinant(), g.determinant());
    }

    #[test]
    fn size_reduction_keeps_bstar(g in gram(5)) {
        let (r, t) = size_reduce(&g);
        prop_assert_eq!(g.apply_unimodular(&t).unwrap(), r.clone());
        prop_assert_eq!(r.ldl().bstar, g.ldl().bstar);
        let half = Rat::new(1.into(), 2.into());
        let mu = r.ldl().mu;
        for i in 0..mu.len() {
            for j in 0..i {
                prop_assert!(mu[i][j].abs() <= half);
            }
        }
    }

    #[test]
    fn hkz_reduce_is_certified_and_idempotent(g in gram(4), ops in ops()) {
        let g = g.apply_unimodular(&unimodular(g.rank(), &ops)).unwrap();
        let rep = hkz_reduce(&g);
        prop_assert!(is_hkz_reduced(&rep.reduced).is_reduced());
        prop_assert!(common::det_is_unit(&rep.transform.determinant()));
        prop_assert_eq!(g.apply_unimodular(&rep.transform).unwrap(), rep.reduced.clone());
        let again = hkz_reduce(&rep.reduced);
        prop_assert_eq!(&again.reduced, &rep.reduced);
        prop_assert!(again.transform.is_identity());
    }

    #[test]
    fn defect_is_at_least_one_and_basis_order_free(g in gram(5), perm in any::<u64>(), signs in any::<u64>()) {
        let d = orthogonality_defect(&g);
        prop_assert!(d >= Rat::one());
        let n = g.rank();
        let mut order: Vec<usize> = (0..n).collect();
        let mut r = perm;
        for i in (1..n).rev() {
            order.swap(i, (r % (i as u64 + 1)) as usize);
            r /= i as u64 + 1;
        }
        let rows: Vec<Vec<i64>> = order
            .iter()
            .enumerate()
            .map(|(row, &col)| {
                let s = if signs >> row & 1 == 1 { -1 } else { 1 };
                (0..n).map(|c| if c == col { s } else { 0 }).collect()
            })
            .collect();
        let moved = g.apply_unimodular(&Unimodular::from_ints(&rows).unwrap()).unwrap();
        prop_assert_eq!(orthogonality_defect(&moved), d);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn shortest_vector_matches_brute_force(g in gram(3)) {
        let s = shortest_vector(&g);
        prop_assert!(s.coeffs.iter().any(|&c| c != 0));
        prop_assert_eq!(g.quadratic_form_value(&s.coeffs).unwrap(), s.norm_sq.clone());
        let bound = common::covering_bound(&g, &s.norm_sq);
        prop_assume!(bound <= 8);
        prop_assert_eq!(common::brute_min(&g, bound), s.norm_sq);
    }
}
