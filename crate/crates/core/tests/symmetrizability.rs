mod common;

use avcdos::channel::{
    averaged_channel, catalog, validate_avc, vectorize, Avc, Distribution, StochMatrix,
};
use avcdos::hull::{hulls_intersect, is_dos_full_knowledge, verify_hull_result, HullIntersection};
use avcdos::linear::{enumerate_basic_feasible, verify_farkas, LinearSystem};
use avcdos::rational::{rat, Rational};
use avcdos::symmetrize::{
    build_symmetrizing_system, evaluate_defect_polynomial, is_symmetrizable,
    symmetrizability_margin, verify_symmetrizer, SymmetrizabilityDecision,
};
use num_traits::Zero;
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn corpus(seed: u64, n: usize, max: usize) -> Vec<Avc> {
    let mut r = common::rng(seed);
    (0..n)
        .map(|_| {
            let (nx, ns, ny) = common::random_dims(&mut r, max);
            common::random_channel(&mut r, nx, ns, ny)
        })
        .collect()
}

#[test]
fn decision_matches_enumeration_and_certifies() {
    let (mut sym, mut non) = (0, 0);
    for w in corpus(1, 250, 3) {
        let sys = build_symmetrizing_system(&w);
        let oracle = enumerate_basic_feasible(&sys).unwrap().is_feasible();
        match is_symmetrizable(&w) {
            SymmetrizabilityDecision::Symmetrizable { witness_u } => {
                assert!(oracle);
                assert!(verify_symmetrizer(&w, &witness_u).unwrap());
                sym += 1;
            }
            SymmetrizabilityDecision::NonSymmetrizable { certificate } => {
                assert!(!oracle);
                assert!(verify_farkas(&sys, &certificate));
                non += 1;
            }
        }
    }
    assert!(sym > 30 && non > 30, "{sym} / {non}");
}

#[test]
fn trivial_families() {
    let mut r = common::rng(2);
    for _ in 0..60 {
        let (nx, ns, ny) = common::random_dims(&mut r, 3);
        // state-independent: symmetrizable iff all input rows coincide
        let w = common::state_independent(&mut r, nx, ns, ny);
        let rows_equal = (0..nx).all(|x| w.row(x, 0) == w.row(0, 0));
        assert_eq!(is_symmetrizable(&w).is_symmetrizable(), rows_equal);
        // symmetric in (x, s): the identity U symmetrizes
        let w = common::symmetric_channel(&mut r, nx, ny);
        assert!(verify_symmetrizer(&w, &StochMatrix::identity(nx).unwrap()).unwrap());
        assert!(is_symmetrizable(&w).is_symmetrizable());
        // input-independent: always symmetrizable
        let w = common::input_independent(&mut r, nx, ns, ny);
        assert!(is_symmetrizable(&w).is_symmetrizable());
    }
    assert!(is_symmetrizable(&catalog::xor()).is_symmetrizable());
    assert!(!is_symmetrizable(&catalog::identity_dmc(3)).is_symmetrizable());
}

#[test]
fn margin_and_defect_polynomial() {
    for w in corpus(3, 80, 3) {
        let d = w.dims();
        let margin = symmetrizability_margin(&w);
        match is_symmetrizable(&w) {
            SymmetrizabilityDecision::Symmetrizable { witness_u } => {
                assert!(margin.is_zero());
                let p =
                    evaluate_defect_polynomial(&vectorize(&w), &witness_u.flatten(), d).unwrap();
                assert!(p.is_zero());
            }
            SymmetrizabilityDecision::NonSymmetrizable { .. } => {
                assert!(margin > Rational::zero());
                let mut r = common::rng(9);
                for _ in 0..5 {
                    let u: Vec<Rational> = (0..d.nx)
                        .flat_map(|_| common::random_dist(&mut r, d.ns))
                        .collect();
                    assert!(
                        evaluate_defect_polynomial(&vectorize(&w), &u, d).unwrap()
                            > Rational::zero()
                    );
                }
            }
        }
    }
}

/// Independent hull oracle: the mixing feasibility problem by enumeration.
fn hulls_meet(w: &Avc, x: usize, xh: usize) -> bool {
    let d = w.dims();
    let mut sys = LinearSystem::new(2 * d.ns);
    for y in 0..d.ny {
        let mut row = vec![Rational::zero(); 2 * d.ns];
        for s in 0..d.ns {
            row[s] = w.w(y, x, s).clone();
            row[d.ns + s] = -w.w(y, xh, s).clone();
        }
        sys.add_eq(row, Rational::zero());
    }
    for half in 0..2 {
        let mut row = vec![Rational::zero(); 2 * d.ns];
        for s in 0..d.ns {
            row[half * d.ns + s] = rat(1, 1);
        }
        sys.add_eq(row, rat(1, 1));
    }
    sys.all_nonneg();
    enumerate_basic_feasible(&sys).unwrap().is_feasible()
}

#[test]
fn hull_results_verify_and_match_oracle() {
    for w in corpus(4, 120, 3) {
        let nx = w.dims().nx;
        for x in 0..nx {
            for xh in 0..nx {
                if x == xh {
                    assert!(hulls_intersect(&w, x, xh).is_err());
                    continue;
                }
                let res = hulls_intersect(&w, x, xh).unwrap();
                assert!(verify_hull_result(&w, x, xh, &res));
                assert_eq!(!res.is_disjoint(), hulls_meet(&w, x, xh));
            }
        }
        if nx == 2 {
            // two inputs: symmetrizable exactly when the hulls meet
            assert_eq!(
                is_symmetrizable(&w).is_symmetrizable(),
                hulls_meet(&w, 0, 1)
            );
        }
    }
}

#[test]
fn symmetrizable_channels_are_full_knowledge_dos() {
    for w in corpus(5, 200, 3) {
        let SymmetrizabilityDecision::Symmetrizable { witness_u } = is_symmetrizable(&w) else {
            continue;
        };
        let report = is_dos_full_knowledge(&w, true);
        assert!(report.dos_possible);
        for pair in &report.pairs {
            assert!(matches!(pair.result, HullIntersection::Intersect { .. }));
            // U(·|x̂) mixes the x-hull and U(·|x) the x̂-hull into the same point
            let q_x = Distribution::new(witness_u.row(pair.xhat).to_vec()).unwrap();
            let q_xh = Distribution::new(witness_u.row(pair.x).to_vec()).unwrap();
            let a = averaged_channel(&w, &q_x).unwrap();
            let b = averaged_channel(&w, &q_xh).unwrap();
            assert_eq!(a.row(pair.x), b.row(pair.xhat));
            let common = Distribution::new(a.row(pair.x).to_vec()).unwrap();
            let via_u = HullIntersection::Intersect {
                q_x,
                q_xhat: q_xh,
                common_point: common,
            };
            assert!(verify_hull_result(&w, pair.x, pair.xhat, &via_u));
        }
    }
}

fn relabel(w: &Avc, px: &[usize], ps: &[usize], py: &[usize]) -> Avc {
    let t = w.to_table();
    let table: Vec<Vec<Vec<Rational>>> = px
        .iter()
        .map(|&x| {
            ps.iter()
                .map(|&s| py.iter().map(|&y| t[x][s][y].clone()).collect())
                .collect()
        })
        .collect();
    validate_avc(&table).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn verdict_ignores_relabeling(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let (nx, ns, ny) = common::random_dims(&mut r, 3);
        let w = common::random_channel(&mut r, nx, ns, ny);
        let mut perm = |n: usize| { let mut p: Vec<usize> = (0..n).collect(); p.shuffle(&mut r); p };
        let (px, ps, py) = (perm(nx), perm(ns), perm(ny));
        let v = relabel(&w, &px, &ps, &py);
        prop_assert_eq!(is_symmetrizable(&w).verdict(), is_symmetrizable(&v).verdict());
    }

    #[test]
    fn duplicating_a_state_keeps_the_verdict(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let (nx, ns, ny) = common::random_dims(&mut r, 3);
        let w = common::random_channel(&mut r, nx, ns, ny);
        let mut ps: Vec<usize> = (0..ns).collect();
        ps.push(0);
        let v = relabel(&w, &(0..nx).collect::<Vec<_>>(), &ps, &(0..ny).collect::<Vec<_>>());
        prop_assert_eq!(is_symmetrizable(&w).verdict(), is_symmetrizable(&v).verdict());
    }
}
