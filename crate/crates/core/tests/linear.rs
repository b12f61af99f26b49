mod common;

use avcdos::linear::{
    enumerate_basic_feasible, enumerate_vertices, fm_decide, fourier_motzkin_eliminate,
    lp_feasible, lp_optimize, verify_farkas, LinearSystem, OptimizationResult, Sense,
    DEFAULT_FM_CAP,
};
use avcdos::rational::{dot, int, rat, Rational};
use proptest::prelude::*;
use rand::seq::SliceRandom;

#[test]
fn lp_fm_and_enumeration_agree() {
    let mut r = common::rng(1);
    let mut feasible = 0;
    for _ in 0..300 {
        let sys = common::random_system(&mut r, 6);
        let lp = lp_feasible(&sys).unwrap();
        let oracle = enumerate_basic_feasible(&sys).unwrap();
        let fm = fm_decide(&sys, 100_000).unwrap();
        assert_eq!(lp.is_feasible(), oracle.is_feasible(), "{sys}");
        assert_eq!(lp.is_feasible(), fm, "{sys}");
        match lp.witness() {
            Some(x) => {
                assert!(sys.is_satisfied_by(x));
                feasible += 1;
            }
            None => assert!(verify_farkas(&sys, lp.certificate().unwrap()), "{sys}"),
        }
    }
    assert!(
        (60..=240).contains(&feasible),
        "unbalanced sample: {feasible}"
    );
}

#[test]
fn verdicts_ignore_row_order_and_scaling() {
    let mut r = common::rng(2);
    for _ in 0..100 {
        let sys = common::random_system(&mut r, 5);
        let base = lp_feasible(&sys).unwrap().is_feasible();
        let mut eq: Vec<usize> = (0..sys.equalities.len()).collect();
        let mut ineq: Vec<usize> = (0..sys.inequalities.len()).collect();
        eq.shuffle(&mut r);
        ineq.shuffle(&mut r);
        let mut p = sys.permuted(&eq, &ineq);
        for row in p.inequalities.iter_mut() {
            let k = rat(
                rand::Rng::gen_range(&mut r, 1..=5),
                rand::Rng::gen_range(&mut r, 1..=3),
            );
            row.coeffs.iter_mut().for_each(|c| *c *= &k);
            row.rhs *= &k;
        }
        let res = lp_feasible(&p).unwrap();
        assert_eq!(res.is_feasible(), base);
        if let Some(c) = res.certificate() {
            assert!(verify_farkas(&p, c));
        }
    }
}

#[test]
fn optimum_matches_best_vertex() {
    let mut r = common::rng(3);
    let mut checked = 0;
    while checked < 60 {
        let mut sys = common::random_system(&mut r, 4);
        // bound the polyhedron so that an optimum exists whenever it is nonempty
        let n = sys.num_vars;
        sys.nonneg_vars = (0..n).collect();
        for j in 0..n {
            let mut c = vec![int(0); n];
            c[j] = int(1);
            sys.add_le(c, int(5));
        }
        let obj: Vec<Rational> = (0..n).map(|_| common::random_int(&mut r, 3)).collect();
        let verts = enumerate_vertices(&sys).unwrap();
        match lp_optimize(&sys, &obj, Sense::Minimize).unwrap() {
            OptimizationResult::Optimal { value, argmin } => {
                let best = verts.iter().map(|v| dot(&obj, v)).min().unwrap();
                assert_eq!(value, best);
                assert!(sys.is_satisfied_by(&argmin));
                assert_eq!(dot(&obj, &argmin), value);
                checked += 1;
            }
            OptimizationResult::Infeasible { farkas } => {
                assert!(verts.is_empty());
                assert!(verify_farkas(&sys, &farkas));
            }
            OptimizationResult::Unbounded => panic!("bounded polytope reported unbounded"),
        }
    }
}

#[test]
fn fm_projection_preserves_feasibility() {
    let mut r = common::rng(4);
    for _ in 0..100 {
        let sys = common::random_system(&mut r, 5);
        let mut cur = sys.clone();
        let base = lp_feasible(&sys).unwrap().is_feasible();
        while cur.num_vars > 1 {
            let var = rand::Rng::gen_range(&mut r, 0..cur.num_vars);
            cur = fourier_motzkin_eliminate(&cur, var).unwrap();
            assert_eq!(lp_feasible(&cur).unwrap().is_feasible(), base);
        }
    }
}

#[test]
fn simple_infeasible_certificate() {
    // x ≥ 0, x ≤ −1
    let mut sys = LinearSystem::new(1);
    sys.add_le(vec![int(1)], int(-1)).set_nonneg(0);
    let res = lp_feasible(&sys).unwrap();
    assert!(!res.is_feasible());
    assert!(verify_farkas(&sys, res.certificate().unwrap()));
    assert!(!fm_decide(&sys, DEFAULT_FM_CAP).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn feasible_results_carry_witnesses(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let sys = common::random_system(&mut r, 4);
        match lp_feasible(&sys).unwrap().witness() {
            Some(x) => prop_assert!(sys.is_satisfied_by(x)),
            None => prop_assert!(!enumerate_basic_feasible(&sys).unwrap().is_feasible()),
        }
    }
}
