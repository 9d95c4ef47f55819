mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use solar_core::group::DEFAULT_CAP;
use solar_core::{
    build_penalty, coordinate_update, generate_group, majorizes, pava, soft_threshold,
    solve_min_norm, solve_min_norm_from, solve_min_norm_observed, taut_string, DualState,
    PenaltyKind, PenaltySpec, SolarBase, SolveOptions, SweepOrder,
};

fn assorted_bases<R: Rng>(rng: &mut R, n: usize) -> Vec<SolarBase> {
    let lam = rng.gen_range(0.1..2.0);
    let mut out = vec![
        base(PenaltyKind::Lasso, n, lam),
        base(PenaltyKind::FusedGraph, n, lam),
        base(PenaltyKind::IsotonicGraph, n, 0.0),
        base(PenaltyKind::NearlyIsotonicGraph, n, lam),
        base(PenaltyKind::TrendFilter, n, lam),
        base(PenaltyKind::SparseFused, n, lam),
        build_penalty(
            &PenaltySpec::new(PenaltyKind::FusedGraph, n, lam).with_edges(random_connected_graph(rng, n, 3)),
        )
        .unwrap(),
    ];
    let rows: Vec<Vec<f64>> = (0..n + 2).map(|_| gaussian_vec(rng, n, 1.0)).collect();
    out.push(build_penalty(&PenaltySpec::new(PenaltyKind::CustomMatrix, n, lam).with_matrix(rows)).unwrap());
    out
}

#[test]
fn update_coefficients_lie_in_unit_interval() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        for b in assorted_bases(&mut rng, 8) {
            let x = gaussian_vec(&mut rng, 8, 2.0);
            let fit = solve_min_norm(&x, &b, &SolveOptions::default().traced()).unwrap();
            for rec in fit.trace().unwrap() {
                assert!(rec.c >= -1e-9 && rec.c <= 1.0 + 1e-9, "c = {}", rec.c);
            }
        }
    }
}

#[test]
fn iterates_are_monotone_in_the_majorization_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let b = base(PenaltyKind::FusedGraph, 8, 0.7);
    let g = generate_group(&b, DEFAULT_CAP).unwrap();
    for _ in 0..20 {
        let x = gaussian_vec(&mut rng, 8, 2.0);
        let mut st = DualState::new(&x, &b).unwrap();
        let mut prev = st.y().to_vec();
        for _ in 0..30 {
            for j in 0..b.len() {
                coordinate_update(&mut st, j, &b);
                let cur = st.y().to_vec();
                assert!(majorizes(&g, &cur, &prev).unwrap().holds);
                prev = cur;
            }
        }
    }
}

#[test]
fn fit_is_the_prox_and_residual_is_the_projection() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        for b in assorted_bases(&mut rng, 7) {
            let x = gaussian_vec(&mut rng, 7, 2.0);
            let fit = solve_min_norm(&x, &b, &SolveOptions::default()).unwrap();
            assert!(fit.converged);
            assert!(fit.kkt_residual <= 1e-9);
            // x − U(x) is a point of Z with feasible coefficients
            for (a, iv) in fit.alpha().iter().zip(b.intervals()) {
                assert!(iv.contains(*a));
            }
            let p = b.combine(fit.alpha()).unwrap();
            let recon: Vec<f64> = fit.u.iter().zip(&p).map(|(u, q)| u + q).collect();
            assert!(max_abs_diff(&recon, &x) <= 1e-9);
            // Fenchel: ⟨x − U, U⟩ = h(U)
            let h = b.support_function_with_slack(&fit.u, 1e-7).unwrap();
            let pairing = dot(&p, &fit.u);
            assert!(pairing >= h - 1e-7, "pairing {pairing} < h {h}");
            assert!(pairing <= h + 1e-7);
        }
    }
}

#[test]
fn penalized_objective_is_minimal_at_fit() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10 {
        for b in assorted_bases(&mut rng, 6) {
            let x = gaussian_vec(&mut rng, 6, 2.0);
            let fit = solve_min_norm(&x, &b, &SolveOptions::default()).unwrap();
            let obj = |t: &[f64]| {
                0.5 * t.iter().zip(&x).map(|(a, c)| (a - c) * (a - c)).sum::<f64>()
                    + b.support_function_with_slack(t, 1e-7).unwrap()
            };
            let best = obj(&fit.u);
            for _ in 0..20 {
                let t: Vec<f64> = fit.u.iter().map(|v| v + 0.1 * gaussian(&mut rng)).collect();
                assert!(obj(&t) >= best - 1e-9);
            }
        }
    }
}

#[test]
fn solution_does_not_depend_on_the_start() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let opts = SolveOptions { tol: 1e-14, kkt_tol: 1e-11, ..SolveOptions::default() };
    for _ in 0..10 {
        for b in assorted_bases(&mut rng, 6) {
            let x = gaussian_vec(&mut rng, 6, 2.0);
            let a = solve_min_norm(&x, &b, &opts).unwrap();
            let start = DualState::with_alpha(&x, &b, random_alpha(&mut rng, &b, 5.0)).unwrap();
            let shuffled = SolveOptions { sweep_order: SweepOrder::CyclicShuffledOnce { seed: 3 }, ..opts };
            let c = solve_min_norm_from(start, &b, &shuffled).unwrap();
            assert!(max_abs_diff(&a.u, &c.u) <= 1e-7);
        }
    }
}

#[test]
fn fast_solvers_match_dual_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for &n in &[10, 200] {
        for &lam in &[0.1, 1.0, 10.0] {
            let x = gaussian_vec(&mut rng, n, 1.0);
            let fused = solve_min_norm(&x, &base(PenaltyKind::FusedGraph, n, lam), &SolveOptions::default()).unwrap();
            assert!(max_abs_diff(&fused.u, &taut_string(&x, lam).unwrap()) <= 1e-6);
            let lasso = solve_min_norm(&x, &base(PenaltyKind::Lasso, n, lam), &SolveOptions::default()).unwrap();
            assert!(max_abs_diff(&lasso.u, &soft_threshold(&x, lam).unwrap()) <= 1e-10);
        }
        let iso = solve_min_norm(&x_for(&mut rng, n), &base(PenaltyKind::IsotonicGraph, n, 0.0), &SolveOptions::default()).unwrap();
        assert!(max_abs_diff(&iso.u, &pava(iso.state.x()).unwrap()) <= 1e-6);
    }
}

fn x_for<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / n as f64 + gaussian(rng)).collect()
}

#[test]
fn taut_string_preserves_the_mean() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let n = rng.gen_range(2..300);
        let x = gaussian_vec(&mut rng, n, 3.0);
        let fit = taut_string(&x, rng.gen_range(0.0..20.0)).unwrap();
        let m = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
        assert!((m(&fit) - m(&x)).abs() <= 1e-9);
    }
}

#[test]
fn taut_string_has_least_majorized_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let n = 6;
        let lam = 0.6;
        let x = gaussian_vec(&mut rng, n, 2.0);
        let g = generate_group(&base(PenaltyKind::FusedGraph, n, 1.0), DEFAULT_CAP).unwrap();
        let fit = taut_string(&x, lam).unwrap();
        let mut w = vec![0.0];
        for v in &x {
            w.push(w.last().unwrap() + v);
        }
        for _ in 0..20 {
            // a random string in the tube with pinned endpoints
            let mut z = w.clone();
            for zi in z.iter_mut().take(n).skip(1) {
                *zi += rng.gen_range(-lam..lam);
            }
            let dz: Vec<f64> = z.windows(2).map(|p| p[1] - p[0]).collect();
            assert!(majorizes(&g, &fit, &dz).unwrap().holds);
        }
    }
}

#[test]
fn lasso_converges_in_one_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let x = gaussian_vec(&mut rng, 1000, 1.0);
    let b = base(PenaltyKind::Lasso, 1000, 0.5);
    let mut st = DualState::new(&x, &b).unwrap();
    for j in 0..b.len() {
        coordinate_update(&mut st, j, &b);
    }
    assert!(max_abs_diff(st.y(), &soft_threshold(&x, 0.5).unwrap()) <= 1e-12);
}

#[test]
fn observer_sees_every_update() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let x = gaussian_vec(&mut rng, 30, 1.0);
    let b = base(PenaltyKind::FusedGraph, 30, 0.5);
    let mut seen = 0;
    let fit = solve_min_norm_observed(DualState::new(&x, &b).unwrap(), &b, &SolveOptions::default(), &mut |_, recs| {
        seen += recs.len();
    })
    .unwrap();
    assert_eq!(seen, fit.sweeps * b.len());
    let plain = solve_min_norm(&x, &b, &SolveOptions::default()).unwrap();
    assert_eq!(plain.u, fit.u);
}
