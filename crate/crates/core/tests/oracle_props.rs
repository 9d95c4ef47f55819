mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use solar_core::group::DEFAULT_CAP;
use solar_core::oracle::{gminimal_failures, sample_feasible};
use solar_core::{
    build_penalty, generate_group, gminimal_sample_check, solve_min_norm, PenaltyKind, PenaltySpec,
    SolveOptions,
};

/// Permutation-invariant convex test functions.
fn test_functions() -> Vec<(&'static str, Box<dyn Fn(&[f64]) -> f64>)> {
    vec![
        ("sum of squares", Box::new(|y: &[f64]| y.iter().map(|v| v * v).sum())),
        (
            "log-sum-exp",
            Box::new(|y: &[f64]| {
                let m = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                m + y.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
            }),
        ),
        (
            "top-2 sum",
            Box::new(|y: &[f64]| {
                let mut s = y.to_vec();
                s.sort_by(|a, b| b.total_cmp(a));
                s.iter().take(2).sum()
            }),
        ),
        ("string length", Box::new(|y: &[f64]| y.iter().map(|v| (1.0 + v * v).sqrt()).sum())),
        ("max abs", Box::new(|y: &[f64]| y.iter().map(|v| v.abs()).fold(0.0, f64::max))),
    ]
}

#[test]
fn fit_minimizes_every_invariant_convex_function() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let fs = test_functions();
    for kind in [PenaltyKind::FusedGraph, PenaltyKind::IsotonicGraph, PenaltyKind::NearlyIsotonicGraph] {
        for _ in 0..10 {
            let n = rng.gen_range(3..7);
            let b = base(kind, n, rng.gen_range(0.2..1.5));
            let x = gaussian_vec(&mut rng, n, 2.0);
            let u = solve_min_norm(&x, &b, &SolveOptions::default()).unwrap().u;
            for _ in 0..50 {
                let z = sample_feasible(&b, &x, &mut rng).unwrap();
                for (name, f) in &fs {
                    assert!(f(&u) <= f(&z) + 1e-9, "{name}: {} > {}", f(&u), f(&z));
                }
            }
        }
    }
}

#[test]
fn fit_is_group_minimal_in_the_feasible_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let specs = [
        PenaltySpec::new(PenaltyKind::Lasso, 2, 0.8),
        PenaltySpec::new(PenaltyKind::FusedGraph, 3, 0.8),
        PenaltySpec::new(PenaltyKind::IsotonicGraph, 4, 0.0),
        PenaltySpec::new(PenaltyKind::SparseFused, 4, 0.5),
        PenaltySpec::new(PenaltyKind::Nonneg, 5, 0.0).with_lambdas(vec![]),
    ];
    for spec in &specs {
        let b = build_penalty(spec).unwrap();
        let g = generate_group(&b, DEFAULT_CAP).unwrap();
        for _ in 0..5 {
            let x = gaussian_vec(&mut rng, spec.n, 2.0);
            assert!(gminimal_sample_check(&b, &g, &x, 50, &mut rng).unwrap(), "{:?}", spec.kind);
        }
    }
}

#[test]
fn perturbed_fit_is_not_group_minimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for kind in [PenaltyKind::FusedGraph, PenaltyKind::Lasso] {
        let b = base(kind, 4, 0.5);
        let g = generate_group(&b, DEFAULT_CAP).unwrap();
        let x = gaussian_vec(&mut rng, 4, 2.0);
        let mut u = solve_min_norm(&x, &b, &SolveOptions::default()).unwrap().u;
        for v in &mut u {
            *v += 1e-2;
        }
        assert!(gminimal_failures(&b, &g, &x, &u, 50, &mut rng).unwrap() > 0);
    }
}

#[test]
fn feasible_samples_respect_the_intervals() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let b = base(PenaltyKind::IsotonicGraph, 5, 0.0);
    let x = gaussian_vec(&mut rng, 5, 1.0);
    for _ in 0..100 {
        let z = sample_feasible(&b, &x, &mut rng).unwrap();
        // x − z lies in the isotonic support set: its cumulative sums are ≥ 0
        // up to the last, which is 0
        let mut acc = 0.0;
        for i in 0..5 {
            acc += x[i] - z[i];
            if i < 4 {
                assert!(acc >= -1e-12);
            }
        }
        assert!(acc.abs() <= 1e-9);
    }
}
