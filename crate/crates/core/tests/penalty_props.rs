mod common;

use common::*;
use proptest::prelude::*;
use solar_core::{build_penalty, sum_penalties, PenaltyKind, PenaltySpec};

fn bounded_kind() -> impl Strategy<Value = PenaltyKind> {
    prop_oneof![
        Just(PenaltyKind::Lasso),
        Just(PenaltyKind::FusedGraph),
        Just(PenaltyKind::NearlyIsotonicGraph),
        Just(PenaltyKind::TrendFilter),
        Just(PenaltyKind::SparseFused),
    ]
}

fn vec_of(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-5.0..5.0f64, n)
}

proptest! {
    #[test]
    fn support_is_positively_homogeneous(kind in bounded_kind(), lam in 0.0..3.0f64, t in 0.0..10.0f64, th in vec_of(6)) {
        let b = build_penalty(&PenaltySpec::new(kind, 6, lam)).unwrap();
        let h = b.support_function(&th).unwrap();
        let scaled: Vec<f64> = th.iter().map(|v| t * v).collect();
        prop_assert!((b.support_function(&scaled).unwrap() - t * h).abs() <= 1e-10 * (1.0 + t * h.abs()));
    }

    #[test]
    fn support_is_convex(kind in bounded_kind(), lam in 0.0..3.0f64, a in 0.0..1.0f64, p in vec_of(5), q in vec_of(5)) {
        let b = build_penalty(&PenaltySpec::new(kind, 5, lam)).unwrap();
        let mid: Vec<f64> = p.iter().zip(&q).map(|(u, v)| a * u + (1.0 - a) * v).collect();
        let lhs = b.support_function(&mid).unwrap();
        let rhs = a * b.support_function(&p).unwrap() + (1.0 - a) * b.support_function(&q).unwrap();
        prop_assert!(lhs <= rhs + 1e-10 * (1.0 + rhs.abs()));
    }

    #[test]
    fn sum_of_penalties_adds_support_functions(l1 in 0.0..3.0f64, l2 in 0.0..3.0f64, th in vec_of(5)) {
        let a = build_penalty(&PenaltySpec::new(PenaltyKind::Lasso, 5, l1)).unwrap();
        let b = build_penalty(&PenaltySpec::new(PenaltyKind::TrendFilter, 5, l2)).unwrap();
        let s = sum_penalties(&a, &b).unwrap();
        let want = a.support_function(&th).unwrap() + b.support_function(&th).unwrap();
        prop_assert!((s.support_function(&th).unwrap() - want).abs() <= 1e-10);
    }

    #[test]
    fn support_set_points_satisfy_the_support_inequality(kind in bounded_kind(), lam in 0.0..3.0f64, th in vec_of(5), seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let b = build_penalty(&PenaltySpec::new(kind, 5, lam)).unwrap();
        let z = b.combine(&random_alpha(&mut rng, &b, 1e3)).unwrap();
        prop_assert!(dot(&z, &th) <= b.support_function(&th).unwrap() + 1e-9);
    }

    #[test]
    fn isotonic_support_is_indicator_of_monotone_cone(th in vec_of(5)) {
        let b = base(PenaltyKind::IsotonicGraph, 5, 0.0);
        let monotone = th.windows(2).all(|w| w[0] <= w[1]);
        let h = b.support_function(&th).unwrap();
        prop_assert_eq!(h, if monotone { 0.0 } else { f64::INFINITY });
    }

    #[test]
    fn custom_matrix_matches_l1_of_product(rows in proptest::collection::vec(vec_of(4), 1..5), lam in 0.0..2.0f64, th in vec_of(4)) {
        prop_assume!(rows.iter().all(|r| norm(r) > 1e-3));
        let b = build_penalty(&PenaltySpec::new(PenaltyKind::CustomMatrix, 4, lam).with_matrix(rows.clone())).unwrap();
        let want: f64 = lam * rows.iter().map(|r| dot(r, &th).abs()).sum::<f64>();
        prop_assert!((b.support_function(&th).unwrap() - want).abs() <= 1e-9 * (1.0 + want));
    }
}
