//! Generator families and the reduction `T(x) = ∇φ*(U(x))` from penalized
//! least squares to expofam-type estimators.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dual::{solve_min_norm, solve_min_norm_from, DualState, SolveOptions};
use crate::error::{check_dim, Error, Result};
use crate::fast::{pava, soft_threshold, taut_string};
use crate::group::{generate_group, Classification, GroupReport, Verdict, DEFAULT_CAP};
use crate::linalg::{dot, norm, norm_sq};
use crate::penalty::{build_penalty, PenaltyKind, PenaltySpec, SolarBase};

/// Threshold below which `|⟨rⱼ, T(x)⟩|` counts as zero in the change-point
/// pattern.
pub const PATTERN_TOL: f64 = 1e-8;

/// Prox-gradient residual accepted when the line search can no longer
/// find a decrease above rounding error (inexact inner prox solves).
const EXHAUSTED_RESIDUAL: f64 = 1e-5;

const INVARIANCE_SAMPLES: usize = 100;
const INVARIANCE_SEED: u64 = 0x5eed;

/// `log(1 + eᵗ)` without overflow.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + libm::log1p(libm::exp(-t))
    } else {
        libm::log1p(libm::exp(t))
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + libm::exp(-t))
    } else {
        let e = libm::exp(t);
        e / (1.0 + e)
    }
}

/// Group of orthogonal maps a generator is known to be invariant under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvarianceTag {
    Permutation,
    SignChange,
    SignedPermutation,
    Orthogonal,
}

impl InvarianceTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            InvarianceTag::Permutation => "permutation",
            InvarianceTag::SignChange => "sign-change",
            InvarianceTag::SignedPermutation => "signed-permutation",
            InvarianceTag::Orthogonal => "orthogonal",
        }
    }

    /// Whether invariance under this tag implies invariance under every
    /// group with the given classification.
    pub fn covers(&self, class: Classification) -> bool {
        use Classification as C;
        match self {
            InvarianceTag::Orthogonal => true,
            InvarianceTag::SignedPermutation => {
                matches!(class, C::Trivial | C::SignChange | C::Permutation | C::SignedPermutation)
            }
            InvarianceTag::Permutation => matches!(class, C::Trivial | C::Permutation),
            InvarianceTag::SignChange => matches!(class, C::Trivial | C::SignChange),
        }
    }
}

impl fmt::Display for InvarianceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Convex generators `φ` with closed-form `∇φ` and `∇φ*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorFamily {
    /// `½‖θ‖²`
    Gaussian,
    /// `Σ log(1 + e^θⱼ)`
    Bernoulli,
    /// `Σ e^θⱼ`
    Poisson,
    /// `‖θ‖⁴ / 4`
    SphericalPower,
}

impl GeneratorFamily {
    pub const ALL: [GeneratorFamily; 4] = [
        GeneratorFamily::Gaussian,
        GeneratorFamily::Bernoulli,
        GeneratorFamily::Poisson,
        GeneratorFamily::SphericalPower,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            GeneratorFamily::Gaussian => "gaussian",
            GeneratorFamily::Bernoulli => "bernoulli",
            GeneratorFamily::Poisson => "poisson",
            GeneratorFamily::SphericalPower => "spherical-power",
        }
    }

    pub fn tag(&self) -> InvarianceTag {
        match self {
            GeneratorFamily::Gaussian | GeneratorFamily::SphericalPower => InvarianceTag::Orthogonal,
            GeneratorFamily::Bernoulli | GeneratorFamily::Poisson => InvarianceTag::Permutation,
        }
    }

    pub fn is_separable(&self) -> bool {
        !matches!(self, GeneratorFamily::SphericalPower)
    }

    /// Open interval of admissible means per coordinate. The spherical
    /// family accepts all of `ℝⁿ`.
    pub fn mean_domain(&self) -> (f64, f64) {
        match self {
            GeneratorFamily::Gaussian | GeneratorFamily::SphericalPower => {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
            GeneratorFamily::Bernoulli => (0.0, 1.0),
            GeneratorFamily::Poisson => (0.0, f64::INFINITY),
        }
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        match self {
            GeneratorFamily::Gaussian => 0.5 * norm_sq(theta),
            GeneratorFamily::Bernoulli => theta.iter().map(|&t| softplus(t)).sum(),
            GeneratorFamily::Poisson => theta.iter().map(|&t| libm::exp(t)).sum(),
            GeneratorFamily::SphericalPower => {
                let s = norm_sq(theta);
                0.25 * s * s
            }
        }
    }

    pub fn grad(&self, theta: &[f64]) -> Vec<f64> {
        match self {
            GeneratorFamily::Gaussian => theta.to_vec(),
            GeneratorFamily::Bernoulli => theta.iter().map(|&t| sigmoid(t)).collect(),
            GeneratorFamily::Poisson => theta.iter().map(|&t| libm::exp(t)).collect(),
            GeneratorFamily::SphericalPower => {
                let s = norm_sq(theta);
                theta.iter().map(|t| s * t).collect()
            }
        }
    }

    /// `φ(new) − φ(old)`, evaluated without cancellation so that tiny
    /// changes near an optimum keep their sign.
    pub fn value_change(&self, old: &[f64], new: &[f64]) -> f64 {
        let pairs = old.iter().zip(new);
        match self {
            GeneratorFamily::Gaussian => pairs.map(|(o, n)| 0.5 * (n - o) * (n + o)).sum(),
            GeneratorFamily::Bernoulli => pairs
                .map(|(&o, &n)| {
                    let d = n - o;
                    if d > 700.0 {
                        softplus(n) - softplus(o)
                    } else {
                        // log((1 + eⁿ)/(1 + eᵒ)) = log1p(σ(o)·expm1(n − o))
                        libm::log1p(sigmoid(o) * libm::expm1(d))
                    }
                })
                .sum(),
            GeneratorFamily::Poisson => pairs.map(|(&o, &n)| libm::exp(o) * libm::expm1(n - o)).sum(),
            GeneratorFamily::SphericalPower => {
                let ds: f64 = pairs.map(|(o, n)| (n - o) * (n + o)).sum();
                0.25 * ds * (norm_sq(new) + norm_sq(old))
            }
        }
    }

    /// Coordinates of `u` outside the open mean domain.
    pub fn boundary_coords(&self, u: &[f64]) -> Vec<usize> {
        let (lo, hi) = self.mean_domain();
        u.iter()
            .enumerate()
            .filter(|(_, &v)| !(v > lo && v < hi) || !v.is_finite())
            .map(|(j, _)| j)
            .collect()
    }

    /// `∇φ*(u) = (∇φ)⁻¹(u)`.
    pub fn conj_grad(&self, u: &[f64]) -> Result<Vec<f64>> {
        let bad = self.boundary_coords(u);
        if !bad.is_empty() {
            return Err(Error::BoundarySolution(bad));
        }
        Ok(match self {
            GeneratorFamily::Gaussian => u.to_vec(),
            GeneratorFamily::Bernoulli => u.iter().map(|&v| libm::log(v / (1.0 - v))).collect(),
            GeneratorFamily::Poisson => u.iter().map(|&v| libm::log(v)).collect(),
            GeneratorFamily::SphericalPower => {
                let r = norm(u);
                if r == 0.0 {
                    vec![0.0; u.len()]
                } else {
                    let f = libm::pow(r, -2.0 / 3.0);
                    u.iter().map(|v| v * f).collect()
                }
            }
        })
    }
}

impl fmt::Display for GeneratorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GeneratorFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "gaussian" => GeneratorFamily::Gaussian,
            "bernoulli" | "binomial" => GeneratorFamily::Bernoulli,
            "poisson" => GeneratorFamily::Poisson,
            "spherical-power" => GeneratorFamily::SphericalPower,
            other => return Err(Error::InvalidArgument(format!("unknown family `{other}`"))),
        })
    }
}

/// `T(x) = ∇φ*(u)` for `u = U(x)`.
pub fn reduce(family: GeneratorFamily, u: &[f64]) -> Result<Vec<f64>> {
    family.conj_grad(u)
}

fn reflect_in_place(r: &[f64], x: &mut [f64]) {
    let c = 2.0 * dot(r, x);
    for (xi, ri) in x.iter_mut().zip(r) {
        *xi -= c * ri;
    }
}

/// Whether `φ` is invariant under the group in `report`: the family's tag
/// must cover the classification, and `φ(g·θ) = φ(θ)` must hold on sampled
/// pairs. Elements are drawn from the enumerated group when available and
/// as random words in the generating reflections otherwise.
pub fn check_invariance(family: GeneratorFamily, report: &GroupReport) -> bool {
    if !family.tag().covers(report.classification) {
        return false;
    }
    let n = report.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(INVARIANCE_SEED);
    for _ in 0..INVARIANCE_SAMPLES {
        let theta: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let moved = if report.has_elements() {
            report.act(rng.gen_range(0..report.elements.len()), &theta)
        } else if report.generators.is_empty() {
            theta.clone()
        } else {
            let mut v = theta.clone();
            for _ in 0..rng.gen_range(1..=8) {
                let r = &report.generators[rng.gen_range(0..report.generators.len())];
                reflect_in_place(r, &mut v);
            }
            v
        };
        let f0 = family.value(&theta);
        if (family.value(&moved) - f0).abs() > 1e-9 * (1.0 + f0.abs()) {
            return false;
        }
    }
    true
}

/// Composite objective `φ(θ) − ⟨x, θ⟩ + h(θ)`. Hard-constraint terms
/// tolerate violations up to `1e-8 (1 + ‖θ‖)`.
pub fn objective(family: GeneratorFamily, base: &SolarBase, x: &[f64], theta: &[f64]) -> Result<f64> {
    check_dim(base.dim(), theta.len())?;
    check_dim(base.dim(), x.len())?;
    let h = base.support_function_with_slack(theta, 1e-8 * (1.0 + norm(theta)))?;
    Ok(family.value(theta) - dot(x, theta) + h)
}

/// `F(new) − F(old)` for the composite objective, term by term.
pub fn objective_change(
    family: GeneratorFamily,
    base: &SolarBase,
    x: &[f64],
    old: &[f64],
    new: &[f64],
) -> Result<f64> {
    check_dim(base.dim(), old.len())?;
    check_dim(base.dim(), new.len())?;
    check_dim(base.dim(), x.len())?;
    let slack = 1e-8 * (1.0 + norm(new).max(norm(old)));
    let term = |iv: &crate::penalty::ExtInterval, s: f64| {
        let t = iv.support(s);
        if t == f64::INFINITY && s.abs() <= slack {
            0.0
        } else {
            t
        }
    };
    let mut dh = 0.0;
    for (r, iv) in base.bases().iter().zip(base.intervals()) {
        let (tn, to) = (term(iv, r.dot(new)), term(iv, r.dot(old)));
        if tn == f64::INFINITY {
            return Ok(f64::INFINITY);
        }
        if to != f64::INFINITY {
            dh += tn - to;
        }
    }
    let lin: f64 = x.iter().zip(new.iter().zip(old)).map(|(xi, (n, o))| xi * (n - o)).sum();
    Ok(family.value_change(old, new) - lin + dh)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Relative objective decrease at which to stop; the prox-gradient
    /// residual must also be below `√tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Sufficient-decrease constant of the line search.
    pub armijo: f64,
    /// Options of the inner prox solves.
    pub prox: SolveOptions,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            tol: 1e-14,
            max_iter: 100_000,
            armijo: 1e-4,
            prox: SolveOptions { tol: 1e-15, kkt_tol: 1e-13, ..SolveOptions::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub theta: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// Norm of the last prox-gradient step divided by its step size.
    pub residual: f64,
    pub converged: bool,
    pub line_search_failed: bool,
}

/// Solves `min φ(θ) − ⟨x, θ⟩ + h(θ)` directly by proximal gradient.
///
/// Each step tries `s = 1` and halves until
/// `F(θ⁺) ≤ F(θ) − (c/s)‖θ⁺ − θ‖²`; the prox of `s·h` is the minimum-norm
/// element of `v − s·Z(B, Λ)`, computed by the dual solver warm-started from
/// the previous coefficients.
pub fn oracle_solve(
    family: GeneratorFamily,
    base: &SolarBase,
    x: &[f64],
    opts: &OracleOptions,
) -> Result<OracleSolution> {
    check_dim(base.dim(), x.len())?;
    let n = x.len();
    let mut theta = vec![0.0; n];
    let mut f = objective(family, base, x, &theta)?;
    if !f.is_finite() {
        return Err(Error::InvalidArgument("objective is not finite at the origin".into()));
    }
    // dual coefficients of the last accepted prox, for step size 1
    let mut alpha_unit: Option<Vec<f64>> = None;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut line_search_failed = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let g = family.grad(&theta);
        let mut s = 1.0;
        let mut unit_residual = f64::INFINITY;
        let accepted = loop {
            let v: Vec<f64> = theta.iter().zip(&g).zip(x).map(|((t, gi), xi)| t - s * (gi - xi)).collect();
            let scaled = base.scaled(s);
            let state = match &alpha_unit {
                Some(a) => {
                    let warm: Vec<f64> = a
                        .iter()
                        .zip(scaled.intervals())
                        .map(|(ai, iv)| iv.clip(ai * s))
                        .collect();
                    DualState::with_alpha(&v, &scaled, warm)?
                }
                None => DualState::new(&v, &scaled)?,
            };
            let fit = solve_min_norm_from(state, &scaled, &opts.prox)?;
            let cand = fit.u.clone();
            let change = objective_change(family, base, x, &theta, &cand)?;
            let step_sq: f64 = cand.iter().zip(&theta).map(|(a, b)| (a - b) * (a - b)).sum();
            if s == 1.0 {
                unit_residual = libm::sqrt(step_sq);
            }
            if change.is_finite() && change <= -opts.armijo / s * step_sq {
                let unit: Vec<f64> = fit.alpha().iter().map(|a| a / s).collect();
                break Some((cand, change, step_sq, s, unit));
            }
            if step_sq == 0.0 {
                break Some((cand, 0.0, 0.0, s, fit.alpha().iter().map(|a| a / s).collect()));
            }
            s *= 0.5;
            if s < 1e-30 {
                break None;
            }
        };
        let Some((cand, change, step_sq, s, unit)) = accepted else {
            // no step decreases F beyond rounding: accept the point if the
            // unit prox-gradient step is at the rounding floor
            residual = unit_residual;
            if unit_residual <= libm::sqrt(opts.tol).max(EXHAUSTED_RESIDUAL) {
                converged = true;
            } else {
                line_search_failed = true;
            }
            break;
        };
        let decrease = -change;
        residual = libm::sqrt(step_sq) / s;
        theta = cand;
        f += change;
        alpha_unit = Some(unit);
        if decrease <= opts.tol * (1.0 + f.abs()) && residual <= libm::sqrt(opts.tol) {
            converged = true;
            break;
        }
    }
    let objective = objective(family, base, x, &theta)?;
    Ok(OracleSolution { theta, objective, iterations, residual, converged, line_search_failed })
}

/// How `U(x)` is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// A fast solver when one applies, else dual coordinate descent.
    Auto,
    TautString,
    Pava,
    SoftThreshold,
    DualCd,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Auto => "auto",
            Method::TautString => "taut-string",
            Method::Pava => "pava",
            Method::SoftThreshold => "soft-threshold",
            Method::DualCd => "dual-cd",
        }
    }

    /// The fast solver matching a penalty, if any.
    pub fn fast_for(spec: &PenaltySpec) -> Option<Method> {
        match spec.kind {
            PenaltyKind::Lasso => Some(Method::SoftThreshold),
            PenaltyKind::FusedGraph if spec.is_chain() => Some(Method::TautString),
            PenaltyKind::IsotonicGraph if spec.is_chain() => Some(Method::Pava),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "auto" => Method::Auto,
            "taut-string" => Method::TautString,
            "pava" => Method::Pava,
            "soft-threshold" => Method::SoftThreshold,
            "dual-cd" => Method::DualCd,
            other => return Err(Error::InvalidArgument(format!("unknown method `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub method: Method,
    pub solve: SolveOptions,
    /// Report the indices `j` with `|⟨rⱼ, T(x)⟩| ≤ 1e-8`.
    pub change_points: bool,
    pub group_cap: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            method: Method::Auto,
            solve: SolveOptions::default(),
            change_points: false,
            group_cap: DEFAULT_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub family: GeneratorFamily,
    pub penalty: PenaltyKind,
    pub n: usize,
    pub lambda: Vec<f64>,
    pub method: Method,
    /// `U(x)`, the penalized least-squares fit.
    pub u: Vec<f64>,
    /// `T(x) = ∇φ*(U(x))`; `None` when `U(x)` touches the mean-domain
    /// boundary.
    pub t: Option<Vec<f64>>,
    pub classification: Classification,
    pub verdict: Verdict,
    pub group_order: Option<u128>,
    pub group_order_log10: Option<f64>,
    pub invariance: InvarianceTag,
    /// Dual coordinate-descent sweeps; `None` for the fast solvers.
    pub sweeps: Option<usize>,
    pub converged: bool,
    pub kkt_residual: f64,
    /// Zero-based base indices `j` with `|⟨rⱼ, T(x)⟩| ≤ 1e-8`.
    pub change_points: Option<Vec<usize>>,
    /// Zero-based coordinates of `U(x)` outside the open mean domain.
    pub boundary: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("{family} is invariant under {tag} maps only, but the penalty group is {classification} ({verdict}); the reduction does not apply")]
    Invariance {
        family: GeneratorFamily,
        tag: InvarianceTag,
        classification: Classification,
        verdict: Verdict,
    },
    #[error("U(x) lies on the boundary of the {} mean domain at coordinates {:?}; T(x) is not attained", .0.family, .0.boundary)]
    Boundary(Box<FitReport>),
    #[error(transparent)]
    Core(#[from] Error),
}

/// Dual coefficients reproducing `x − u` for chain-difference bases, clipped
/// into the intervals.
fn chain_alpha(x: &[f64], u: &[f64], base: &SolarBase) -> Vec<f64> {
    let mut acc = 0.0;
    let mut alpha = Vec::with_capacity(base.len());
    for (k, iv) in base.intervals().iter().enumerate() {
        acc += x[k] - u[k];
        alpha.push(iv.clip(-core::f64::consts::SQRT_2 * acc));
    }
    alpha
}

/// Solves for `U(x)` with the requested method. Returns the fit, the sweep
/// count for the dual solver, whether it converged, and the KKT residual.
fn least_squares(
    spec: &PenaltySpec,
    base: &SolarBase,
    x: &[f64],
    method: Method,
    solve: &SolveOptions,
) -> Result<(Vec<f64>, Option<usize>, bool, f64)> {
    let lam = spec.lambda.first().copied().unwrap_or(0.0);
    let fast = Method::fast_for(spec);
    if !matches!(method, Method::Auto | Method::DualCd) && fast != Some(method) {
        return Err(Error::InvalidArgument(format!(
            "method {method} does not apply to the {} penalty",
            spec.kind
        )));
    }
    let chosen = match method {
        Method::Auto => fast.unwrap_or(Method::DualCd),
        m => m,
    };
    let (u, alpha) = match chosen {
        Method::SoftThreshold => {
            let u = soft_threshold(x, lam)?;
            let alpha: Vec<f64> = x
                .iter()
                .zip(&u)
                .zip(base.intervals())
                .map(|((a, b), iv)| iv.clip(a - b))
                .collect();
            (u, alpha)
        }
        Method::TautString => {
            let u = taut_string(x, lam)?;
            let alpha = chain_alpha(x, &u, base);
            (u, alpha)
        }
        Method::Pava => {
            let u = pava(x)?;
            let alpha = chain_alpha(x, &u, base);
            (u, alpha)
        }
        _ => {
            let fit = solve_min_norm(x, base, solve)?;
            return Ok((fit.u, Some(fit.sweeps), fit.converged, fit.kkt_residual));
        }
    };
    let state = DualState::with_alpha(x, base, alpha)?;
    Ok((u, None, true, state.kkt_residual(base)))
}

/// Fits the expofam-type estimator with generator `family` and the penalty
/// in `spec`, by computing the penalized least-squares fit `U(x)` and
/// mapping it through `∇φ*`.
pub fn fit(
    family: GeneratorFamily,
    spec: &PenaltySpec,
    x: &[f64],
    opts: &FitOptions,
) -> core::result::Result<FitReport, FitError> {
    let base = build_penalty(spec)?;
    check_dim(base.dim(), x.len())?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("data must be finite".into()).into());
    }
    let group = generate_group(&base, opts.group_cap)?;
    if !check_invariance(family, &group) {
        return Err(FitError::Invariance {
            family,
            tag: family.tag(),
            classification: group.classification,
            verdict: group.verdict,
        });
    }
    let (u, sweeps, converged, kkt_residual) = least_squares(spec, &base, x, opts.method, &opts.solve)?;
    let method = match opts.method {
        Method::Auto => Method::fast_for(spec).unwrap_or(Method::DualCd),
        m => m,
    };
    let mut report = FitReport {
        family,
        penalty: spec.kind,
        n: spec.n,
        lambda: spec.lambda.clone(),
        method,
        u,
        t: None,
        classification: group.classification,
        verdict: group.verdict,
        group_order: group.order,
        group_order_log10: group.order_log10,
        invariance: family.tag(),
        sweeps,
        converged,
        kkt_residual,
        change_points: None,
        boundary: Vec::new(),
    };
    match reduce(family, &report.u) {
        Ok(t) => {
            if opts.change_points {
                report.change_points = Some(
                    base.bases()
                        .iter()
                        .enumerate()
                        .filter(|(_, r)| r.dot(&t).abs() <= PATTERN_TOL)
                        .map(|(j, _)| j)
                        .collect(),
                );
            }
            report.t = Some(t);
            Ok(report)
        }
        Err(Error::BoundarySolution(bad)) => {
            report.boundary = bad;
            Err(FitError::Boundary(Box::new(report)))
        }
        Err(e) => Err(e.into()),
    }
}
