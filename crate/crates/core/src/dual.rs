//! Minimum-norm element of the dual feasible set `x − Z(B, Λ)` by cyclic
//! coordinate descent over the base vectors.
//!
//! Each update moves the fitted value `y` along one base vector `r` to the
//! minimum-norm point of `(y + span r) ∩ (x − Z)`. Because `‖y_new‖ ≤ ‖y‖`
//! and `y`, `S_r·y`, `y_new` are collinear, every update is a convex
//! combination of `y` and its reflection, which the trace records.
//!
//! Long chains of interior coefficients make plain coordinate descent slow
//! (fused lasso with large `λ`), so the solver can interleave exact
//! least-squares steps over the currently free coefficients.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};
use crate::linalg::norm_sq;
use crate::penalty::SolarBase;

/// Sweeps between full recomputations of `y` from `α`.
pub const REFRESH_EVERY: usize = 64;

/// Subspace steps taken when the stop rule first holds.
pub const POLISH_ROUNDS: usize = 8;

/// Sweeps between subspace steps when [`SolveOptions::accelerate`] is set.
pub const ACCEL_EVERY: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepOrder {
    Cyclic,
    /// A fixed cyclic order, shuffled once from the seed before the first sweep.
    CyclicShuffledOnce { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Relative decrease of `‖y‖²` over one sweep below which the solver stops.
    pub tol: f64,
    /// KKT residual required alongside the decrease test.
    pub kkt_tol: f64,
    pub max_sweeps: usize,
    pub trace: bool,
    pub sweep_order: SweepOrder,
    /// Interleave subspace steps: every [`ACCEL_EVERY`] sweeps, minimize
    /// `‖y‖²` exactly over the coefficients strictly inside their intervals
    /// (conjugate gradients), then move toward that point as far as the
    /// intervals allow. The same step is taken once more when the stop
    /// rule first holds, followed by a confirming sweep. Never increases
    /// `‖y‖`; traces record only the coordinate updates.
    pub accelerate: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            kkt_tol: 1e-9,
            max_sweeps: 100_000,
            trace: false,
            sweep_order: SweepOrder::Cyclic,
            accelerate: true,
        }
    }
}

impl SolveOptions {
    pub fn traced(mut self) -> Self {
        self.trace = true;
        self
    }
}

/// One coordinate update: `y_new = y_old + c (S_r·y_old − y_old)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub sweep: usize,
    pub j: usize,
    pub alpha_old: f64,
    pub alpha_new: f64,
    pub c: f64,
    /// `‖y‖` after the update.
    pub norm_y: f64,
}

/// Coordinate-descent state: coefficients `α` and `y = x − Σ αⱼ rⱼ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    x: Vec<f64>,
    alpha: Vec<f64>,
    y: Vec<f64>,
    norm_sq: f64,
    sweep: usize,
    trace: Option<Vec<TraceRecord>>,
}

impl DualState {
    /// Starts from `αⱼ` = the point of `Iⱼ` closest to zero.
    pub fn new(x: &[f64], base: &SolarBase) -> Result<Self> {
        let alpha = base.intervals().iter().map(|iv| iv.nearest_to_zero()).collect();
        Self::with_alpha(x, base, alpha)
    }

    /// Starts from a given feasible `α`.
    pub fn with_alpha(x: &[f64], base: &SolarBase, alpha: Vec<f64>) -> Result<Self> {
        check_dim(base.dim(), x.len())?;
        check_dim(base.len(), alpha.len())?;
        for (j, (a, iv)) in alpha.iter().zip(base.intervals()).enumerate() {
            if !iv.contains(*a) || !a.is_finite() {
                return Err(Error::InvalidArgument(alloc::format!(
                    "alpha[{j}] = {a} is outside {iv}"
                )));
            }
        }
        let mut st = DualState {
            x: x.to_vec(),
            alpha,
            y: Vec::new(),
            norm_sq: 0.0,
            sweep: 0,
            trace: None,
        };
        st.refresh(base);
        Ok(st)
    }

    pub fn enable_trace(&mut self) {
        if self.trace.is_none() {
            self.trace = Some(Vec::new());
        }
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn sweep(&self) -> usize {
        self.sweep
    }

    pub fn trace(&self) -> Option<&[TraceRecord]> {
        self.trace.as_deref()
    }

    pub fn take_trace(&mut self) -> Option<Vec<TraceRecord>> {
        self.trace.take()
    }

    /// Recomputes `y` from `α` to remove accumulated drift.
    pub fn refresh(&mut self, base: &SolarBase) {
        let mut y = self.x.clone();
        for (b, a) in base.bases().iter().zip(&self.alpha) {
            if *a != 0.0 {
                b.axpy(-a, &mut y);
            }
        }
        self.norm_sq = norm_sq(&y);
        self.y = y;
    }

    /// `max_j |αⱼ − clip(αⱼ + ⟨rⱼ, y⟩, Iⱼ)|`
    pub fn kkt_residual(&self, base: &SolarBase) -> f64 {
        base.bases()
            .iter()
            .zip(base.intervals())
            .zip(&self.alpha)
            .map(|((b, iv), a)| (a - iv.clip(a + b.dot(&self.y))).abs())
            .fold(0.0, f64::max)
    }
}

/// Exact minimization over `αⱼ ∈ Iⱼ` with the other coefficients fixed:
/// `αⱼ ← clip(αⱼ + ⟨rⱼ, y⟩, Iⱼ)`. Returns the decrease of `‖y‖²`.
pub fn coordinate_update(state: &mut DualState, j: usize, base: &SolarBase) -> f64 {
    let iv = base.interval(j);
    if iv.lo() == iv.hi() {
        return 0.0;
    }
    let r = base.base(j);
    let g = r.dot(&state.y);
    let old = state.alpha[j];
    let new = iv.clip(old + g);
    let delta = new - old;
    let mut decrease = 0.0;
    if delta != 0.0 {
        r.axpy(-delta, &mut state.y);
        state.alpha[j] = new;
        // ‖y − δr‖² = ‖y‖² − 2δg + δ²
        decrease = delta * (2.0 * g - delta);
        state.norm_sq -= decrease;
    }
    if let Some(trace) = state.trace.as_mut() {
        let c = if g != 0.0 { delta / (2.0 * g) } else { 0.0 };
        trace.push(TraceRecord {
            sweep: state.sweep,
            j,
            alpha_old: old,
            alpha_new: new,
            c,
            norm_y: libm::sqrt(state.norm_sq.max(0.0)),
        });
    }
    decrease
}

/// Result of [`solve_min_norm`]: `U(x)` together with the final state.
#[derive(Debug, Clone, PartialEq)]
pub struct MinNormFit {
    /// `U(x)`: the minimum-norm element of `x − Z(B, Λ)`, which is also the
    /// penalized least-squares fit.
    pub u: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
    pub kkt_residual: f64,
    pub state: DualState,
}

impl MinNormFit {
    pub fn alpha(&self) -> &[f64] {
        self.state.alpha()
    }

    pub fn trace(&self) -> Option<&[TraceRecord]> {
        self.state.trace()
    }

    /// `x − U(x) = Σ αⱼ rⱼ`, the projection of `x` onto `Z(B, Λ)`.
    pub fn residual(&self) -> Vec<f64> {
        self.state.x.iter().zip(&self.u).map(|(a, b)| a - b).collect()
    }
}

/// Runs cyclic coordinate descent from the default starting point.
pub fn solve_min_norm(x: &[f64], base: &SolarBase, opts: &SolveOptions) -> Result<MinNormFit> {
    let state = DualState::new(x, base)?;
    solve_min_norm_from(state, base, opts)
}

/// Runs cyclic coordinate descent from a given state.
///
/// Stops when the relative decrease of `‖y‖²` over a sweep is at most
/// `opts.tol` and the KKT residual is at most `opts.kkt_tol`, or after
/// `opts.max_sweeps` sweeps with `converged == false`.
pub fn solve_min_norm_from(
    state: DualState,
    base: &SolarBase,
    opts: &SolveOptions,
) -> Result<MinNormFit> {
    run(state, base, opts, None)
}

/// Like [`solve_min_norm_from`] with tracing on, but hands each sweep's
/// records to `observer` instead of keeping them.
pub fn solve_min_norm_observed(
    state: DualState,
    base: &SolarBase,
    opts: &SolveOptions,
    observer: &mut dyn FnMut(&DualState, &[TraceRecord]),
) -> Result<MinNormFit> {
    let opts = SolveOptions { trace: true, ..*opts };
    run(state, base, &opts, Some(observer))
}

fn run(
    mut state: DualState,
    base: &SolarBase,
    opts: &SolveOptions,
    mut observer: Option<&mut dyn FnMut(&DualState, &[TraceRecord])>,
) -> Result<MinNormFit> {
    check_dim(base.dim(), state.x.len())?;
    check_dim(base.len(), state.alpha.len())?;
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    if opts.trace {
        state.enable_trace();
    }
    let mut order: Vec<usize> = (0..base.len()).filter(|&j| {
        let iv = base.interval(j);
        iv.lo() != iv.hi()
    }).collect();
    if let SweepOrder::CyclicShuffledOnce { seed } = opts.sweep_order {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }

    let mut converged = false;
    let mut kkt = state.kkt_residual(base);
    if order.is_empty() {
        converged = true;
    }
    let mut sweeps_run = 0;
    let mut polished = false;
    while !converged && sweeps_run < opts.max_sweeps {
        let before = state.norm_sq;
        let mut decrease = 0.0;
        for &j in &order {
            decrease += coordinate_update(&mut state, j, base);
        }
        if let Some(obs) = observer.as_mut() {
            let records = state.trace.take().unwrap_or_default();
            obs(&state, &records);
            state.trace = Some(Vec::new());
        }
        state.sweep += 1;
        sweeps_run += 1;
        if state.sweep % REFRESH_EVERY == 0 {
            state.refresh(base);
        }
        if opts.accelerate && sweeps_run % ACCEL_EVERY == 0 && decrease > opts.tol * before.max(f64::MIN_POSITIVE) {
            subspace_step(&mut state, base);
        }
        if decrease <= opts.tol * before.max(f64::MIN_POSITIVE) {
            kkt = state.kkt_residual(base);
            if kkt <= opts.kkt_tol {
                if opts.accelerate && !polished {
                    // one exact step on the final free set, confirmed by another sweep
                    polished = true;
                    // restarted from the refreshed residual each round
                    for _ in 0..POLISH_ROUNDS {
                        if !subspace_step(&mut state, base) {
                            break;
                        }
                    }
                } else {
                    converged = true;
                }
            }
        }
    }
    state.refresh(base);
    kkt = if converged { state.kkt_residual(base) } else { kkt.max(state.kkt_residual(base)) };
    Ok(MinNormFit { u: state.y.clone(), sweeps: sweeps_run, converged, kkt_residual: kkt, state })
}

/// `Σ_{j∈free} v_k r_j` into `out`, then `⟨r_j, out⟩` into `q`.
fn normal_apply(base: &SolarBase, free: &[usize], v: &[f64], out: &mut [f64], q: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for (k, &j) in free.iter().enumerate() {
        base.base(j).axpy(v[k], out);
    }
    for (k, &j) in free.iter().enumerate() {
        q[k] = base.base(j).dot(out);
    }
}

/// Change of `‖y‖²` when the coefficients move to `alpha`, formed from the
/// displacement so that tiny decreases are not lost to rounding of `‖y‖²`.
fn norm_change(state: &DualState, base: &SolarBase, alpha: &[f64]) -> f64 {
    let mut d = alloc::vec![0.0; state.y.len()];
    for (j, (new, old)) in alpha.iter().zip(&state.alpha).enumerate() {
        if new != old {
            base.base(j).axpy(old - new, &mut d);
        }
    }
    let cross: f64 = d.iter().zip(&state.y).map(|(u, v)| u * v).sum();
    norm_sq(&d) + 2.0 * cross
}

/// Minimizes `‖y‖²` over the free coefficients (those strictly inside their
/// intervals) by conjugate gradients on the normal equations, whose initial
/// residual is `⟨rⱼ, y⟩`. The result is clipped into the intervals, or the
/// step is shortened to stay feasible, whichever gives the smaller `‖y‖`;
/// nothing changes unless `‖y‖` decreases.
fn subspace_step(state: &mut DualState, base: &SolarBase) -> bool {
    let free: Vec<usize> = (0..base.len())
        .filter(|&j| {
            let iv = base.interval(j);
            iv.lo() < state.alpha[j] && state.alpha[j] < iv.hi()
        })
        .collect();
    let k = free.len();
    if k == 0 {
        return false;
    }
    let n = state.x.len();
    let scale = 1.0 + libm::sqrt(norm_sq(&state.x));
    let eps = 1e-15 * scale;
    let mut a: Vec<f64> = free.iter().map(|&j| state.alpha[j]).collect();
    let mut r: Vec<f64> = free.iter().map(|&j| base.base(j).dot(&state.y)).collect();
    let mut p = r.clone();
    let mut rs: f64 = r.iter().map(|v| v * v).sum();
    let (mut work, mut q) = (alloc::vec![0.0; n], alloc::vec![0.0; k]);
    for _ in 0..(2 * k + 50) {
        if libm::sqrt(rs) <= eps {
            break;
        }
        normal_apply(base, &free, &p, &mut work, &mut q);
        let pq: f64 = p.iter().zip(&q).map(|(u, v)| u * v).sum();
        if !(pq > 0.0) {
            break;
        }
        let step = rs / pq;
        for i in 0..k {
            a[i] += step * p[i];
            r[i] -= step * q[i];
        }
        let rs_new: f64 = r.iter().map(|v| v * v).sum();
        let beta = rs_new / rs;
        rs = rs_new;
        for i in 0..k {
            p[i] = r[i] + beta * p[i];
        }
    }

    let mut clipped = state.alpha.clone();
    let mut t_max: f64 = 1.0;
    for (i, &j) in free.iter().enumerate() {
        let iv = base.interval(j);
        clipped[j] = iv.clip(a[i]);
        let d = a[i] - state.alpha[j];
        if d > 0.0 && iv.hi().is_finite() {
            t_max = t_max.min((iv.hi() - state.alpha[j]) / d);
        } else if d < 0.0 && iv.lo().is_finite() {
            t_max = t_max.min((iv.lo() - state.alpha[j]) / d);
        }
    }
    let mut shortened = state.alpha.clone();
    for (i, &j) in free.iter().enumerate() {
        shortened[j] = base.interval(j).clip(state.alpha[j] + t_max * (a[i] - state.alpha[j]));
    }
    let nc = norm_change(state, base, &clipped);
    let ns = norm_change(state, base, &shortened);
    let (best, value) = if nc <= ns { (clipped, nc) } else { (shortened, ns) };
    if value < 0.0 {
        state.alpha = best;
        state.refresh(base);
        true
    } else {
        false
    }
}
