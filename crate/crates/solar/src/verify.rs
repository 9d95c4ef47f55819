//! Property suite run by `solar verify`: cross-module invariants checked on
//! seeded random instances, each against its own oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use solar_core::expofam::objective;
use solar_core::fast::differences;
use solar_core::group::{majorizes_generic, DEFAULT_CAP};
use solar_core::oracle::{gminimal_failures, sample_feasible};
use solar_core::{
    build_penalty, coordinate_update, fit, generate_group, majorizes, oracle_solve, pava, reduce,
    soft_threshold, solve_min_norm, solve_min_norm_from, solve_min_norm_observed, taut_string,
    Classification, DualState, FitOptions, GeneratorFamily, GroupReport, OracleOptions, PenaltyKind,
    PenaltySpec, SolarBase, SolveOptions,
};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "SOLAR_OPT_THREADS";

pub const DEFAULT_SEEDS: [u64; 3] = [1, 2, 3];

#[derive(Debug, Clone, Default)]
pub struct SuiteOptions {
    pub seeds: Vec<u64>,
    /// Added to every coordinate of `U(x)` before the checks that consume it.
    pub perturb: Option<f64>,
    pub threads: usize,
    /// Extra instance supplied by the user.
    pub data: Option<(PenaltySpec, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub seed: u64,
    pub passed: bool,
    /// Worst value of the checked quantity.
    pub worst: f64,
    pub limit: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seeds: Vec<u64>,
    pub perturb: Option<f64>,
    pub threads: usize,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    /// Fixed-width pass/fail table.
    pub fn table(&self) -> String {
        let w = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(4).max(5);
        let mut s = format!("{:<w$}  {:>4}  {:<4}  {:>12}  {:>9}  detail\n", "check", "seed", "", "worst", "limit");
        for c in &self.checks {
            s.push_str(&format!(
                "{:<w$}  {:>4}  {:<4}  {:>12.3e}  {:>9.1e}  {}\n",
                c.name,
                c.seed,
                if c.passed { "PASS" } else { "FAIL" },
                c.worst,
                c.limit,
                c.detail
            ));
        }
        s.push_str(&format!("{} checks, {} failed\n", self.checks.len(), self.failures()));
        s
    }

    pub fn to_csv(&self) -> csv::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["check", "seed", "passed", "worst", "limit", "detail"])?;
        for c in &self.checks {
            w.write_record([
                c.name.clone(),
                c.seed.to_string(),
                c.passed.to_string(),
                format!("{:.16e}", c.worst),
                format!("{:.16e}", c.limit),
                c.detail.clone(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv writes utf-8"))
    }
}

/// Worker count: `SOLAR_OPT_THREADS` if set to a positive integer, capped
/// by the available parallelism.
pub fn threads_from_env() -> usize {
    let avail = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(t) if t > 0 => t.min(avail),
        _ => avail,
    }
}

pub fn gaussian_vec<R: Rng>(rng: &mut R, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Random connected graph on `n` vertices with 1-based edges: a random
/// spanning tree plus `extra` distinct random edges.
pub fn random_connected_graph<R: Rng>(rng: &mut R, n: usize, extra: usize) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = (2..=n).map(|v| (rng.gen_range(1..v), v)).collect();
    let extra = extra.min(n * (n - 1) / 2 - edges.len());
    while edges.len() < n - 1 + extra {
        let a = rng.gen_range(1..=n);
        let b = rng.gen_range(1..=n);
        let e = (a.min(b), a.max(b));
        if a != b && !edges.contains(&e) {
            edges.push(e);
        }
    }
    edges
}

/// Classical majorization `x ⪯ y`: equal sums and dominated sorted partial
/// sums, both with absolute slack `tol`.
pub fn classically_majorized(x: &[f64], y: &[f64], tol: f64) -> bool {
    let sorted = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    };
    let (sx, sy) = (sorted(x), sorted(y));
    let (mut px, mut py) = (0.0, 0.0);
    for (a, b) in sx.iter().zip(&sy) {
        px += a;
        py += b;
        if px > py + tol {
            return false;
        }
    }
    (px - py).abs() <= tol
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

fn tight() -> SolveOptions {
    SolveOptions { tol: 1e-14, kkt_tol: 1e-12, ..SolveOptions::default() }
}

fn base(kind: PenaltyKind, n: usize, lam: f64) -> SolarBase {
    build_penalty(&PenaltySpec::new(kind, n, lam)).expect("valid built-in spec")
}

fn perturbed(mut u: Vec<f64>, perturb: Option<f64>) -> Vec<f64> {
    if let Some(d) = perturb {
        u.iter_mut().for_each(|v| *v += d);
    }
    u
}

type CheckFn = fn(&mut ChaCha8Rng, Option<f64>) -> Result<Outcome, String>;

/// Worst observed value against its limit (pass iff `worst <= limit`).
struct Outcome {
    worst: f64,
    limit: f64,
    detail: String,
}

fn outcome(worst: f64, limit: f64, detail: impl Into<String>) -> Result<Outcome, String> {
    Ok(Outcome { worst, limit, detail: detail.into() })
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn reflect_and_average(rng: &mut ChaCha8Rng, _: Option<f64>) -> Result<Outcome, String> {
    // distance of c outside [0, 1]
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for kind in [PenaltyKind::FusedGraph, PenaltyKind::NearlyIsotonicGraph, PenaltyKind::TrendFilter] {
        let n = rng.gen_range(5..20);
        let b = base(kind, n, rng.gen_range(0.1..2.0));
        let x = gaussian_vec(rng, n, 2.0);
        let mut obs = |_: &DualState, recs: &[solar_core::TraceRecord]| {
            for r in recs {
                worst = worst.max(-r.c).max(r.c - 1.0);
                count += 1;
            }
        };
        solve_min_norm_observed(DualState::new(&x, &b).map_err(e)?, &b, &SolveOptions::default(), &mut obs)
            .map_err(e)?;
    }
    outcome(worst, 1e-9, format!("{count} traced updates"))
}

fn g_monotone_iterates(rng: &mut ChaCha8Rng, _: Option<f64>) -> Result<Outcome, String> {
    let n = 8;
    let b = base(PenaltyKind::FusedGraph, n, rng.gen_range(0.2..1.5));
    let x = gaussian_vec(rng, n, 2.0);
    let mut state = DualState::new(&x, &b).map_err(e)?;
    let mut violations = 0usize;
    let mut steps = 0usize;
    for _ in 0..200 {
        for j in 0..b.len() {
            let before = state.y().to_vec();
            coordinate_update(&mut state, j, &b);
            steps += 1;
            if !classically_majorized(state.y(), &before, 1e-9) {
                violations += 1;
            }
        }
    }
    outcome(violations as f64, 0.0, format!("{steps} updates, {violations} not majorized by their predecessor"))
}

fn uniqueness(rng: &mut ChaCha8Rng, _: Option<f64>) -> Result<Outcome, String> {
    let n = rng.gen_range(4..12);
    let spec = PenaltySpec::new(PenaltyKind::SparseFused, n, 0.0).with_lambdas(vec![rng.gen_range(0.1..1.0), rng.gen_range(0.1..1.0)]);
    let b = build_penalty(&spec).map_err(e)?;
    let x = gaussian_vec(rng, n, 2.0);
    let a = solve_min_norm(&x, &b, &tight()).map_err(e)?;
    let alpha: Vec<f64> = b.intervals().iter().map(|iv| iv.clip(rng.gen_range(-3.0..3.0))).collect();
    let start = DualState::with_alpha(&x, &b, alpha).map_err(e)?;
    let opts = SolveOptions { sweep_order: solar_core::SweepOrder::CyclicShuffledOnce { seed: rng.gen() }, ..tight() };
    let c = solve_min_norm_from(start, &b, &opts).map_err(e)?;
    outcome(max_abs_diff(&a.u, &c.u), 1e-7, format!("sparse-fused n={n}, two starts"))
}

fn fast_solvers(rng: &mut ChaCha8Rng, _: Option<f64>) -> Result<Outcome, String> {
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let n = rng.gen_range(5..60);
        let lam = rng.gen_range(0.05..3.0);
        let x = gaussian_vec(rng, n, 2.0);
        let fused = solve_min_norm(&x, &base(PenaltyKind::FusedGraph, n, lam), &tight()).map_err(e)?;
        worst = worst.max(max_abs_diff(&fused.u, &taut_string(&x, lam).map_err(e)?));
        let iso = solve_min_norm(&x, &base(PenaltyKind::IsotonicGraph, n, 0.0), &tight()).map_err(e)?;
        worst = worst.max(max_abs_diff(&iso.u, &pava(&x).map_err(e)?));
        let lasso = solve_min_norm(&x, &base(PenaltyKind::Lasso, n, lam), &tight()).map_err(e)?;
        worst = worst.max(max_abs_diff(&lasso.u, &soft_threshold(&x, lam).map_err(e)?));
    }
    outcome(worst, 1e-6, "taut string, PAVA, soft threshold vs dual CD")
}

fn group_structure(rng: &mut ChaCha8Rng, _: Option<f64>) -> Result<Outcome, String> {
    let cases = [
        (PenaltySpec::new(PenaltyKind::Lasso, 3, 1.0), 8u128),
        (PenaltySpec::new(PenaltyKind::FusedGraph, 4, 1.0), 24),
        (PenaltySpec::new(PenaltyKind::SparseFused, 3, 1.0), 48),
        (PenaltySpec::new(PenaltyKind::FusedGraph, 5, 1.0).with_edges(random_connected_graph(rng, 5, 2)), 120),
    ];
    let mut worst: f64 = 0.0;
    for (spec, order) in &cases {
        let g = generate_group(&build_penalty(spec).map_err(e)?, DEFAULT_CAP).map_err(e)?;
        if g.order != Some(*order) || g.elements.len() as u128 != *order {
            return outcome(f64::INFINITY, 1e-8, format!("{}: order {:?}, expected {order}", spec.kind, g.order));
        }
        let d = g.dim;
        for m in &g.elements {
            // ‖MᵀM − I‖_max
            for i in 0..d {
                for j in 0..d {
                    let s: f64 = (0..d).map(|k| m[k * d + i] * m[k * d + j]).sum();
                    worst = worst.max((s - if i == j { 1.0 } else { 0.0 }).abs());
                }
            }
        }
        for _ in 0..100 {
            let a = &g.elements[rng.gen_range(0..g.elements.len())];
            let b = &g.elements[rng.gen_range(0..g.elements.len())];
            let p: Vec<f64> = (0..d * d)
                .map(|ij| (0..d).map(|k| a[(ij / d) * d + k] * b[k * d + ij % d]).sum())
                .collect();
            let nearest = g.elements.iter().map(|m| max_abs_diff(m, &p)).fold(f64::INFINITY, f64::min);
            worst = worst.max(nearest);
        }
    }
    outcome(worst, 1e-8, "orders 8/24/48/120, orthogonality, closure")
}

fn majorization_oracle(rng: &mut ChaCha8Rng, _: Option<f64>) -> Result<Outcome, String> {
    let reports = [
        ("permutation", generate_group(&base(PenaltyKind::FusedGraph, 4, 1.0), DEFAULT_CAP).map_err(e)?),
        ("sign-change", generate_group(&base(PenaltyKind::Lasso, 3, 1.0), DEFAULT_CAP).map_err(e)?),
        ("signed-permutation", generate_group(&base(PenaltyKind::SparseFused, 3, 1.0), DEFAULT_CAP).map_err(e)?),
    ];
    let mut disagreements = 0usize;
    let mut total = 0usize;
    for (_, g) in &reports {
        for _ in 0..40 {
            let y = gaussian_vec(rng, g.dim, 1.0);
            let x = random_candidate(rng, g, &y)?;
            let fast = majorizes(g, &x, &y).map_err(e)?;
            let slow = majorizes_generic(g, &x, &y).map_err(e)?;
            total += 1;
            if fast.holds != slow.holds {
                disagreements += 1;
            }
        }
    }
    outcome(disagreements as f64, 0.0, format!("{total} pairs over 3 classifications"))
}

/// Half the time a random convex combination of orbit points (so `x ⪯ y`),
/// otherwise an unrelated scaled draw.
fn random_candidate(rng: &mut ChaCha8Rng, g: &GroupReport, y: &[f64]) -> Result<Vec<f64>, String> {
    if rng.gen_bool(0.5) {
        let orbit = solar_core::orbit(g, y).map_err(e)?;
        let w: Vec<f64> = (0..orbit.len()).map(|_| rng.gen_range(0.0..1.0f64).powi(4)).collect();
        let total: f64 = w.iter().sum();
        Ok((0..y.len()).map(|i| orbit.iter().zip(&w).map(|(p, wk)| p[i] * wk).sum::<f64>() / total).collect())
    } else {
        let s = rng.gen_range(0.3..1.2);
        Ok(gaussian_vec(rng, y.len(), s))
    }
}

fn gminimality(rng: &mut ChaCha8Rng, perturb: Option<f64>) -> Result<Outcome, String> {
    let specs = [
        PenaltySpec::new(PenaltyKind::Lasso, 3, 0.7),
        PenaltySpec::new(PenaltyKind::FusedGraph, 4, 0.7),
        PenaltySpec::new(PenaltyKind::IsotonicGraph, 4, 0.0),
        PenaltySpec::new(PenaltyKind::SparseFused, 3, 0.0).with_lambdas(vec![0.4, 0.6]),
    ];
    let mut failures = 0usize;
    for spec in &specs {
        let b = build_penalty(spec).map_err(e)?;
        let g = generate_group(&b, DEFAULT_CAP).map_err(e)?;
        for _ in 0..3 {
            let x = gaussian_vec(rng, spec.n, 2.0);
            let u = perturbed(solve_min_norm(&x, &b, &tight()).map_err(e)?.u, perturb);
            failures += gminimal_failures(&b, &g, &x, &u, 50, rng).map_err(e)?;
        }
    }
    outcome(failures as f64, 0.0, "feasible samples not majorizing U(x)")
}

fn invariant_convex_functions(rng: &mut ChaCha8Rng, perturb: Option<f64>) -> Result<Outcome, String> {
    let fs: [fn(&[f64]) -> f64; 5] = [
        |y| y.iter().map(|v| v * v).sum(),
        |y| {
            let m = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            m + y.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
        },
        |y| {
            let mut s = y.to_vec();
            s.sort_by(|a, b| b.total_cmp(a));
            s.iter().take(2).sum()
        },
        |y| y.iter().map(|v| (1.0 + v * v).sqrt()).sum(),
        |y| y.iter().map(|v| v.abs()).fold(0.0, f64::max),
    ];
    let mut worst = f64::NEG_INFINITY;
    for kind in [PenaltyKind::FusedGraph, PenaltyKind::IsotonicGraph] {
        for _ in 0..3 {
            let n = rng.gen_range(3..7);
            let b = base(kind, n, rng.gen_range(0.2..1.5));
            let x = gaussian_vec(rng, n, 2.0);
            let u = perturbed(solve_min_norm(&x, &b, &tight()).map_err(e)?.u, perturb);
            for _ in 0..50 {
                let z = sample_feasible(&b, &x, rng).map_err(e)?;
                for f in &fs {
                    worst = worst.max(f(&u) - f(&z));
                }
            }
        }
    }
    outcome(worst, 1e-9, "max f(U) − f(z) over 5 permutation-invariant convex f")
}

fn reduction(rng: &mut ChaCha8Rng, perturb: Option<f64>) -> Result<Outcome, String> {
    let mut worst: f64 = 0.0;
    let mut gap_worst = f64::NEG_INFINITY;
    let n = 10;
    let lam = rng.gen_range(0.02..0.3);
    let xb: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..0.95)).collect();
    let xp: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..5.0)).collect();
    let cases = [
        (GeneratorFamily::Bernoulli, PenaltySpec::new(PenaltyKind::FusedGraph, n, lam), xb.clone()),
        (GeneratorFamily::Poisson, PenaltySpec::new(PenaltyKind::IsotonicGraph, n, 0.0), xp),
        (
            GeneratorFamily::Bernoulli,
            PenaltySpec::new(PenaltyKind::FusedGraph, n, lam / 2.0).with_edges(random_connected_graph(rng, n, 4)),
            xb,
        ),
    ];
    for (fam, spec, x) in &cases {
        let b = build_penalty(spec).map_err(e)?;
        let u = perturbed(solve_min_norm(x, &b, &tight()).map_err(e)?.u, perturb);
        let t = reduce(*fam, &u).map_err(e)?;
        let direct = oracle_solve(*fam, &b, x, &OracleOptions::default()).map_err(e)?;
        if !direct.converged {
            return outcome(f64::INFINITY, 1e-4, format!("{fam}: oracle did not converge"));
        }
        worst = worst.max(max_abs_diff(&t, &direct.theta));
        gap_worst = gap_worst.max(objective(*fam, &b, x, &t).map_err(e)? - direct.objective);
    }
    // report the binding ratio so one number carries both limits
    let ratio = (worst / 1e-4).max(gap_worst / 1e-6);
    outcome(ratio, 1.0, format!("max |T − oracle| {worst:.2e} (≤1e-4), objective gap {gap_worst:.2e} (≤1e-6)"))
}

fn moreau_fenchel(rng: &mut ChaCha8Rng, perturb: Option<f64>) -> Result<Outcome, String> {
    let mut worst = f64::NEG_INFINITY;
    for kind in [PenaltyKind::FusedGraph, PenaltyKind::IsotonicGraph, PenaltyKind::Lasso, PenaltyKind::TrendFilter] {
        let n = rng.gen_range(4..30);
        let b = base(kind, n, rng.gen_range(0.1..2.0));
        let x = gaussian_vec(rng, n, 2.0);
        let fit = solve_min_norm(&x, &b, &SolveOptions::default()).map_err(e)?;
        let u = perturbed(fit.u.clone(), perturb);
        let p: Vec<f64> = x.iter().zip(&u).map(|(a, c)| a - c).collect();
        // ⟨x − U, U⟩ = h(U) at the optimum
        let h = b.support_function_with_slack(&u, 1e-9).map_err(e)?;
        let pairing = h - dot(&p, &u);
        worst = worst.max(fit.kkt_residual / 1e-8).max(pairing / 1e-7).max(-pairing / 1e-7);
    }
    outcome(worst, 1.0, "max of KKT/1e-8 and |h(U) − ⟨x−U, U⟩|/1e-7")
}

fn change_points(rng: &mut ChaCha8Rng, perturb: Option<f64>) -> Result<Outcome, String> {
    let opts = FitOptions { change_points: true, ..FitOptions::default() };
    let mut mismatches = 0usize;
    for _ in 0..5 {
        let n = 30;
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..0.95)).collect();
        let spec = PenaltySpec::new(PenaltyKind::FusedGraph, n, 0.15);
        let gauss = fit(GeneratorFamily::Gaussian, &spec, &x, &opts).map_err(e)?;
        let bern = fit(GeneratorFamily::Bernoulli, &spec, &x, &opts).map_err(e)?;
        let tied = |v: &[f64]| -> Vec<bool> { differences(v).iter().map(|d| d.abs() <= 1e-8).collect() };
        let mut t = bern.t.clone().unwrap_or_default();
        if let Some(d) = perturb {
            // break ties on alternating coordinates
            t.iter_mut().step_by(2).for_each(|v| *v += d);
        }
        if tied(&gauss.u) != tied(&t) {
            mismatches += 1;
        }
    }
    outcome(mismatches as f64, 0.0, "bernoulli vs gaussian zero patterns of first differences")
}

fn support_inequality(rng: &mut ChaCha8Rng, _: Option<f64>) -> Result<Outcome, String> {
    let mut worst = f64::NEG_INFINITY;
    for kind in [PenaltyKind::Lasso, PenaltyKind::FusedGraph, PenaltyKind::NearlyIsotonicGraph, PenaltyKind::TrendFilter] {
        let n = rng.gen_range(4..10);
        let b = base(kind, n, rng.gen_range(0.1..2.0));
        for _ in 0..50 {
            let z = sample_feasible(&b, &vec![0.0; n], rng).map_err(e)?;
            let z: Vec<f64> = z.iter().map(|v| -v).collect();
            let theta = gaussian_vec(rng, n, 1.0);
            let h = b.support_function(&theta).map_err(e)?;
            if h.is_finite() {
                worst = worst.max(dot(&z, &theta) - h);
            }
        }
    }
    outcome(worst, 1e-9, "⟨z, θ⟩ − h(θ) for z in Z(B, Λ)")
}

const CHECKS: &[(&str, CheckFn)] = &[
    ("reflect-and-average", reflect_and_average),
    ("g-monotone-iterates", g_monotone_iterates),
    ("unique-min-norm", uniqueness),
    ("fast-solver-agreement", fast_solvers),
    ("group-structure", group_structure),
    ("majorization-oracle", majorization_oracle),
    ("g-minimality", gminimality),
    ("invariant-convex-min", invariant_convex_functions),
    ("reduction-vs-oracle", reduction),
    ("moreau-fenchel", moreau_fenchel),
    ("change-points", change_points),
    ("support-inequality", support_inequality),
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(n, _)| *n).collect()
}

/// Checks on a user-supplied instance: KKT and Fenchel pairing, plus
/// sampled G-minimality when the group is finite and small.
fn data_checks(spec: &PenaltySpec, x: &[f64], seed: u64, perturb: Option<f64>) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let mut push = |name: &str, r: Result<Outcome, String>| out.push(finish(name, seed, r));
    let b = match build_penalty(spec) {
        Ok(b) => b,
        Err(err) => {
            push("data:penalty", Err(err.to_string()));
            return out;
        }
    };
    let fit = match solve_min_norm(x, &b, &SolveOptions::default()) {
        Ok(f) => f,
        Err(err) => {
            push("data:solve", Err(err.to_string()));
            return out;
        }
    };
    let u = perturbed(fit.u.clone(), perturb);
    let p: Vec<f64> = x.iter().zip(&u).map(|(a, c)| a - c).collect();
    let pairing = b.support_function_with_slack(&u, 1e-9).map(|h| (h - dot(&p, &u)).abs());
    push(
        "data:moreau-fenchel",
        pairing.map_err(e).and_then(|d| outcome((fit.kkt_residual / 1e-8).max(d / 1e-7), 1.0, "KKT/1e-8, pairing/1e-7")),
    );
    if spec.n <= 6 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = generate_group(&b, DEFAULT_CAP).map_err(e).and_then(|g| {
            if g.classification == Classification::OrthogonalFallback || !g.has_elements() {
                outcome(0.0, 0.0, "group not enumerable; skipped")
            } else {
                let f = gminimal_failures(&b, &g, x, &u, 50, &mut rng).map_err(e)?;
                outcome(f as f64, 0.0, "feasible samples not majorizing U(x)")
            }
        });
        push("data:g-minimality", r);
    }
    out
}

fn finish(name: &str, seed: u64, r: Result<Outcome, String>) -> CheckResult {
    match r {
        Ok(o) => CheckResult {
            name: name.into(),
            seed,
            passed: o.worst <= o.limit,
            worst: o.worst,
            limit: o.limit,
            detail: o.detail,
        },
        Err(msg) => CheckResult {
            name: name.into(),
            seed,
            passed: false,
            worst: f64::INFINITY,
            limit: 0.0,
            detail: format!("error: {msg}"),
        },
    }
}

/// Runs every check once per seed on up to `opts.threads` workers. Results
/// are ordered by seed, then check, independent of scheduling.
pub fn lemma_suite(opts: &SuiteOptions) -> SuiteReport {
    let seeds = if opts.seeds.is_empty() { DEFAULT_SEEDS.to_vec() } else { opts.seeds.clone() };
    let jobs: Vec<(u64, usize)> = seeds.iter().flat_map(|&s| (0..CHECKS.len()).map(move |k| (s, k))).collect();
    let slots: Mutex<Vec<Option<CheckResult>>> = Mutex::new(vec![None; jobs.len()]);
    let next = AtomicUsize::new(0);
    let threads = opts.threads.max(1).min(jobs.len());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(seed, k)) = jobs.get(i) else { break };
                let (name, check) = CHECKS[k];
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ k as u64);
                let res = finish(name, seed, check(&mut rng, opts.perturb));
                slots.lock().expect("no worker panics while holding the lock")[i] = Some(res);
            });
        }
    });
    let mut checks: Vec<CheckResult> =
        slots.into_inner().expect("workers joined").into_iter().map(|r| r.expect("every job ran")).collect();
    if let Some((spec, x)) = &opts.data {
        for &s in &seeds {
            checks.extend(data_checks(spec, x, s, opts.perturb));
        }
    }
    SuiteReport {
        passed: checks.iter().all(|c| c.passed),
        seeds,
        perturb: opts.perturb,
        threads,
        checks,
    }
}
