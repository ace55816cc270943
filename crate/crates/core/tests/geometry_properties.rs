//! Property tests for the projection primitives.

use minimax_meta_core::geometry::{
    brute_force_simplex_qp, project_ball, project_simplex, prox_step, FeasibleSet,
};
use minimax_meta_core::linalg;
use proptest::prelude::*;

fn finite_vec(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e3..1e3f64, len)
}

proptest! {
    #[test]
    fn simplex_projection_always_feasible(q in finite_vec(1..=10)) {
        let p = project_simplex(&q).unwrap();
        prop_assert!(p.weights().iter().all(|&w| w >= 0.0));
        let sum: f64 = p.weights().iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn simplex_projection_idempotent(q in finite_vec(1..=10)) {
        let once = project_simplex(&q).unwrap();
        let twice = project_simplex(once.weights()).unwrap();
        let diff = linalg::distance(once.weights(), twice.weights());
        prop_assert!(diff <= 1e-12);
    }

    #[test]
    fn simplex_projection_translation_invariant(
        q in finite_vec(1..=8),
        shift in -1e2..1e2f64,
    ) {
        let shifted: Vec<f64> = q.iter().map(|x| x + shift).collect();
        let a = project_simplex(&q).unwrap();
        let b = project_simplex(&shifted).unwrap();
        prop_assert!(linalg::distance(a.weights(), b.weights()) <= 1e-8);
    }

    #[test]
    fn simplex_matches_brute_force(q in finite_vec(1..=6)) {
        let fast = project_simplex(&q).unwrap();
        let slow = brute_force_simplex_qp(&q).unwrap();
        let diff = fast
            .weights()
            .iter()
            .zip(slow.weights())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        prop_assert!(diff <= 1e-9, "diff {diff} on {q:?}");
    }

    #[test]
    fn ball_projection_feasible_and_nonexpansive(
        u in finite_vec(3..=3),
        v in finite_vec(3..=3),
        radius in 0.1..10.0f64,
    ) {
        let set = FeasibleSet::ball(vec![0.5, -0.25, 1.0], radius).unwrap();
        let pu = project_ball(&u, &set).unwrap();
        let pv = project_ball(&v, &set).unwrap();
        prop_assert!(set.contains(&pu, 1e-9));
        prop_assert!(set.contains(&pv, 1e-9));
        let before = linalg::distance(&u, &v);
        let after = linalg::distance(&pu, &pv);
        prop_assert!(after <= before + 1e-9);
    }

    #[test]
    fn prox_step_with_zero_gradient_is_projection(
        w in finite_vec(2..=2),
        eta in 0.01..10.0f64,
    ) {
        let set = FeasibleSet::ball(vec![0.0, 0.0], 1.0).unwrap();
        let stepped = prox_step(&w, &[0.0, 0.0], eta, &set).unwrap();
        let projected = project_ball(&w, &set).unwrap();
        prop_assert_eq!(stepped, projected);
    }
}
