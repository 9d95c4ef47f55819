//! Specialized solvers for the chain fused lasso, isotonic regression and
//! the lasso. They double as independent checks on the dual solver.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, Error, Result};

/// Endpoint tolerance for strings passed to [`tube_check`].
pub const ENDPOINT_TOL: f64 = 1e-9;

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(alloc::format!("lambda must be finite and >= 0, got {lambda}")))
    }
}

/// Cumulative sums `w` of length `n + 1` with `w₀ = 0`.
pub fn cumulative(x: &[f64]) -> Vec<f64> {
    let mut w = Vec::with_capacity(x.len() + 1);
    let mut acc = 0.0;
    w.push(0.0);
    for v in x {
        acc += v;
        w.push(acc);
    }
    w
}

#[derive(Debug, Clone, Copy)]
struct Pt {
    x: f64,
    y: f64,
}

/// `slope(a, b) < slope(c, d)` for points with increasing abscissae.
#[inline]
fn slope_lt(a: Pt, b: Pt, c: Pt, d: Pt) -> bool {
    (b.y - a.y) * (d.x - c.x) < (d.y - c.y) * (b.x - a.x)
}

/// Chain fused lasso `argmin ½‖x − θ‖² + λ Σ |θⱼ₊₁ − θⱼ|` via the taut string.
///
/// The string runs through the tube `[w − λ, w + λ]` around the cumulative
/// sums with both endpoints pinned; the fit is its sequence of slopes. The
/// string is built by a single funnel sweep: the upper side is the convex
/// minorant of the upper tube boundary seen from the last knot, the lower
/// side the concave majorant of the lower boundary, and a knot is fixed
/// whenever the two sides cross.
pub fn taut_string(x: &[f64], lambda: f64) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    let n = x.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty signal".into()));
    }
    if lambda == 0.0 {
        return Ok(x.to_vec());
    }
    let w = cumulative(x);
    let upper = |i: usize| if i == 0 || i == n { w[i] } else { w[i] + lambda };
    let lower = |i: usize| if i == 0 || i == n { w[i] } else { w[i] - lambda };

    let start = Pt { x: 0.0, y: w[0] };
    let mut knots = vec![start];
    let mut up: VecDeque<Pt> = VecDeque::from([start]);
    let mut lo: VecDeque<Pt> = VecDeque::from([start]);

    for i in 1..=n {
        let p = Pt { x: i as f64, y: upper(i) };
        // p below the lower side: the string must bend up at lo[1]
        while lo.len() >= 2 && slope_lt(lo[0], p, lo[0], lo[1]) {
            lo.pop_front();
            knots.push(lo[0]);
            up.clear();
            up.push_back(lo[0]);
        }
        while up.len() >= 2 && !slope_lt(up[up.len() - 2], up[up.len() - 1], up[up.len() - 1], p) {
            up.pop_back();
        }
        up.push_back(p);

        let q = Pt { x: i as f64, y: lower(i) };
        // q above the upper side: the string must bend down at up[1]
        while up.len() >= 2 && slope_lt(up[0], up[1], up[0], q) {
            up.pop_front();
            knots.push(up[0]);
            lo.clear();
            lo.push_back(up[0]);
        }
        while lo.len() >= 2 && !slope_lt(lo[lo.len() - 1], q, lo[lo.len() - 2], lo[lo.len() - 1]) {
            lo.pop_back();
        }
        lo.push_back(q);
    }
    // at most one side still has interior vertices
    let rest = if up.len() > 2 { up } else { lo };
    knots.extend(rest.into_iter().skip(1));

    let mut fit = vec![0.0; n];
    for pair in knots.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let (ia, ib) = (a.x as usize, b.x as usize);
        if ib == ia {
            continue;
        }
        let s = (b.y - a.y) / (b.x - a.x);
        for v in &mut fit[ia..ib] {
            *v = s;
        }
    }
    Ok(fit)
}

/// Isotonic least squares (nondecreasing) by pool-adjacent-violators with
/// unit weights.
pub fn pava(x: &[f64]) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::InvalidArgument("empty signal".into()));
    }
    // (sum, count) per pooled block
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(x.len());
    for &v in x {
        blocks.push((v, 1));
        while blocks.len() >= 2 {
            let (s1, c1) = blocks[blocks.len() - 1];
            let (s0, c0) = blocks[blocks.len() - 2];
            if s0 / c0 as f64 > s1 / c1 as f64 {
                blocks.pop();
                let last = blocks.len() - 1;
                blocks[last] = (s0 + s1, c0 + c1);
            } else {
                break;
            }
        }
    }
    let mut out = Vec::with_capacity(x.len());
    for (s, c) in blocks {
        let m = s / c as f64;
        out.extend(core::iter::repeat(m).take(c));
    }
    Ok(out)
}

/// `sign(xⱼ)·max(|xⱼ| − λ, 0)`
pub fn soft_threshold(x: &[f64], lambda: f64) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    Ok(x.iter()
        .map(|&v| {
            if v > lambda {
                v - lambda
            } else if v < -lambda {
                v + lambda
            } else {
                0.0
            }
        })
        .collect())
}

/// Whether the string `z` (length `n + 1`, endpoints pinned to those of the
/// cumulative sums `w`) lies in the tube of radius `λ` around `w`.
pub fn tube_check(x: &[f64], lambda: f64, z: &[f64]) -> Result<bool> {
    check_lambda(lambda)?;
    check_dim(x.len() + 1, z.len())?;
    let w = cumulative(x);
    let n = x.len();
    if (z[0] - w[0]).abs() > ENDPOINT_TOL || (z[n] - w[n]).abs() > ENDPOINT_TOL {
        return Err(Error::InvalidArgument("string endpoints must match the cumulative sums".into()));
    }
    Ok(z.iter().zip(&w).all(|(a, b)| (a - b).abs() <= lambda + 1e-9))
}

/// First differences `zᵢ₊₁ − zᵢ`.
pub fn differences(z: &[f64]) -> Vec<f64> {
    z.windows(2).map(|p| p[1] - p[0]).collect()
}
