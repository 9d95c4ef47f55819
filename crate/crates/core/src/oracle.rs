//! Brute-force checks: convex-hull membership by simplex-constrained least
//! squares, and sampled G-minimality of the minimum-norm element.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::dual::{solve_min_norm, SolveOptions};
use crate::error::{check_dim, Error, Result};
use crate::group::{majorizes, GroupReport};
use crate::linalg::{dot, norm, norm_sq, solve_dense};
use crate::penalty::SolarBase;

/// Largest vertex count accepted by [`simplex_least_squares`].
pub const MAX_VERTICES: usize = 10_000;

/// `min ‖x − Σ w_v v‖` over the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexLSProblem {
    vertices: Vec<Vec<f64>>,
    target: Vec<f64>,
}

impl SimplexLSProblem {
    pub fn new(vertices: Vec<Vec<f64>>, target: Vec<f64>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidArgument("no vertices".into()));
        }
        if vertices.len() > MAX_VERTICES {
            return Err(Error::OrbitTooLarge { size: vertices.len(), limit: MAX_VERTICES });
        }
        for v in &vertices {
            check_dim(target.len(), v.len())?;
        }
        Ok(SimplexLSProblem { vertices, target })
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexLSSolution {
    pub weights: Vec<f64>,
    /// `Σ w_v v`, the closest point of the hull.
    pub point: Vec<f64>,
    pub residual: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Affine minimizer of `‖Σ μᵢ pᵢ‖` subject to `Σ μᵢ = 1`.
fn affine_minimizer(points: &[&[f64]]) -> Vec<f64> {
    let k = points.len();
    let mut gram = vec![0.0; k * k];
    let mut scale: f64 = 0.0;
    for i in 0..k {
        for j in 0..=i {
            let g = dot(points[i], points[j]);
            gram[i * k + j] = g + 1.0;
            gram[j * k + i] = g + 1.0;
        }
        scale = scale.max(gram[i * k + i]);
    }
    let ones = vec![1.0; k];
    let sol = solve_dense(gram.clone(), ones.clone(), k).unwrap_or_else(|| {
        let mut reg = gram;
        for i in 0..k {
            reg[i * k + i] += 1e-12 * scale;
        }
        solve_dense(reg, ones, k).unwrap_or_else(|| vec![1.0; k])
    });
    let s: f64 = sol.iter().sum();
    sol.iter().map(|v| v / s).collect()
}

/// Decides how close `target` is to the convex hull of `vertices`.
///
/// Uses Wolfe's minimum-norm-point active-set method on the translated
/// points `v − x`, started from the vertex nearest the target. `tol` bounds
/// the relative optimality gap `‖z‖² − min_v ⟨z, v − x⟩`.
pub fn simplex_least_squares(p: &SimplexLSProblem, tol: f64) -> Result<SimplexLSSolution> {
    let pts: Vec<Vec<f64>> =
        p.vertices.iter().map(|v| v.iter().zip(&p.target).map(|(a, b)| a - b).collect()).collect();
    let k = pts.len();
    let max_sq = pts.iter().map(|v| norm_sq(v)).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let gap_tol = (tol * tol).max(1e-24) * max_sq;
    let budget = 50 * k + 1000;

    let first = (0..k)
        .min_by(|&a, &b| norm_sq(&pts[a]).total_cmp(&norm_sq(&pts[b])))
        .expect("nonempty");
    let mut active: Vec<usize> = vec![first];
    let mut w: Vec<f64> = vec![1.0];
    let mut z = pts[first].clone();
    let mut iterations = 0;
    let mut converged = false;

    let combine = |active: &[usize], w: &[f64]| {
        let mut z = vec![0.0; p.target.len()];
        for (&i, &wi) in active.iter().zip(w) {
            for (zj, pj) in z.iter_mut().zip(&pts[i]) {
                *zj += wi * pj;
            }
        }
        z
    };

    'major: while iterations < budget {
        iterations += 1;
        let zz = norm_sq(&z);
        if zz <= 1e-30 * max_sq {
            converged = true;
            break;
        }
        let (j, best) = (0..k)
            .map(|i| (i, dot(&z, &pts[i])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        if zz - best <= gap_tol || active.contains(&j) {
            converged = true;
            break;
        }
        active.push(j);
        w.push(0.0);
        loop {
            iterations += 1;
            if iterations >= budget {
                break 'major;
            }
            let refs: Vec<&[f64]> = active.iter().map(|&i| pts[i].as_slice()).collect();
            let mu = affine_minimizer(&refs);
            if mu.iter().all(|&m| m > 1e-14) {
                w = mu;
                break;
            }
            // step from w toward mu until a weight hits zero
            let mut theta = 1.0;
            for (wi, mi) in w.iter().zip(&mu) {
                if *mi <= 1e-14 {
                    let denom = wi - mi;
                    if denom > 0.0 {
                        theta = f64::min(theta, wi / denom);
                    }
                }
            }
            let mut next: Vec<f64> =
                w.iter().zip(&mu).map(|(wi, mi)| (1.0 - theta) * wi + theta * mi).collect();
            // drop the vanishing weights, keeping at least one point
            let mut keep_active = Vec::with_capacity(active.len());
            let mut keep_w = Vec::with_capacity(active.len());
            let weakest = (0..next.len()).min_by(|&a, &b| next[a].total_cmp(&next[b])).unwrap();
            for (t, (&i, &wi)) in active.iter().zip(&next).enumerate() {
                if wi > 1e-14 && t != weakest {
                    keep_active.push(i);
                    keep_w.push(wi);
                }
            }
            if keep_active.is_empty() {
                keep_active.push(active[weakest]);
                keep_w.push(1.0);
            }
            let s: f64 = keep_w.iter().sum();
            next = keep_w.iter().map(|v| v / s).collect();
            active = keep_active;
            w = next;
        }
        z = combine(&active, &w);
    }
    let mut weights = vec![0.0; k];
    for (&i, &wi) in active.iter().zip(&w) {
        weights[i] += wi;
    }
    let residual = norm(&combine(&active, &w));
    let mut point = vec![0.0; p.target.len()];
    for (v, wi) in p.vertices.iter().zip(&weights) {
        if *wi != 0.0 {
            for (pj, vj) in point.iter_mut().zip(v) {
                *pj += wi * vj;
            }
        }
    }
    Ok(SimplexLSSolution { weights, point, residual, converged, iterations })
}

/// Truncation used to sample from unbounded intervals:
/// `M = 10 (1 + ‖x‖)`.
fn truncated(lo: f64, hi: f64, m: f64) -> (f64, f64) {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => (lo, hi),
        (false, true) => (hi.min(0.0) - m, hi),
        (true, false) => (lo, lo.max(0.0) + m),
        (false, false) => (-m, m),
    }
}

/// Samples a feasible point `z = x − Σ λⱼ rⱼ` of the dual feasible set,
/// with each `λⱼ` uniform over the (truncated) interval `Iⱼ`.
pub fn sample_feasible<R: Rng + ?Sized>(base: &SolarBase, x: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    check_dim(base.dim(), x.len())?;
    let m = 10.0 * (1.0 + norm(x));
    let lambdas: Vec<f64> = base
        .intervals()
        .iter()
        .map(|iv| {
            let (a, b) = truncated(iv.lo(), iv.hi(), m);
            if a == b {
                a
            } else {
                rng.gen_range(a..=b)
            }
        })
        .collect();
    let z = base.combine(&lambdas)?;
    Ok(x.iter().zip(&z).map(|(a, b)| a - b).collect())
}

/// Checks `u ⪯_G z` for `trials` sampled feasible points `z`. Returns the
/// number of trials where majorization failed.
pub fn gminimal_failures<R: Rng + ?Sized>(
    base: &SolarBase,
    report: &GroupReport,
    x: &[f64],
    u: &[f64],
    trials: usize,
    rng: &mut R,
) -> Result<usize> {
    check_dim(base.dim(), u.len())?;
    if !report.is_finite() {
        return Err(Error::NonFiniteGroup);
    }
    let mut failures = 0;
    for _ in 0..trials {
        let z = sample_feasible(base, x, rng)?;
        if !majorizes(report, u, &z)?.holds {
            failures += 1;
        }
    }
    Ok(failures)
}

/// Samples feasible points of `x − Z(B, Λ)` and checks that the minimum-norm
/// element is G-majorized by each of them.
pub fn gminimal_sample_check<R: Rng + ?Sized>(
    base: &SolarBase,
    report: &GroupReport,
    x: &[f64],
    trials: usize,
    rng: &mut R,
) -> Result<bool> {
    let fit = solve_min_norm(x, base, &SolveOptions { tol: 1e-14, kkt_tol: 1e-12, ..Default::default() })?;
    Ok(gminimal_failures(base, report, x, &fit.u, trials, rng)? == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{generate_group, DEFAULT_CAP};
    use crate::penalty::{build_penalty, PenaltyKind, PenaltySpec};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn square() -> Vec<Vec<f64>> {
        vec![vec![1.0, 1.0], vec![-1.0, 1.0], vec![-1.0, -1.0], vec![1.0, -1.0]]
    }

    #[test]
    fn target_at_vertex() {
        let p = SimplexLSProblem::new(square(), vec![-1.0, 1.0]).unwrap();
        let s = simplex_least_squares(&p, 1e-8).unwrap();
        assert!(s.residual <= 1e-10);
        assert_abs_diff_eq!(s.weights[1], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn target_at_centroid() {
        let p = SimplexLSProblem::new(square(), vec![0.0, 0.0]).unwrap();
        let s = simplex_least_squares(&p, 1e-8).unwrap();
        assert!(s.residual <= 1e-10);
        assert_abs_diff_eq!(s.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn target_outside_hull() {
        // vertices on the unit circle; (2, 0) is at distance 1 from the hull
        let verts: Vec<Vec<f64>> = (0..6)
            .map(|k| {
                let t = k as f64 * core::f64::consts::PI / 3.0;
                vec![libm::cos(t), libm::sin(t)]
            })
            .collect();
        let p = SimplexLSProblem::new(verts, vec![2.0, 0.0]).unwrap();
        let s = simplex_least_squares(&p, 1e-8).unwrap();
        assert!(s.converged);
        assert_abs_diff_eq!(s.residual, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn matches_exhaustive_projection_in_plane() {
        // distance to a polygon = min over edges of the segment distance
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let verts: Vec<Vec<f64>> =
                (0..5).map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
            let x = vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let s = simplex_least_squares(&SimplexLSProblem::new(verts.clone(), x.clone()).unwrap(), 1e-8)
                .unwrap();
            let brute = brute_hull_distance(&verts, &x);
            assert_abs_diff_eq!(s.residual, brute, epsilon = 1e-9);
        }
    }

    fn brute_hull_distance(verts: &[Vec<f64>], x: &[f64]) -> f64 {
        // inside test: x is in the hull iff it lies in some triangle
        let tri_contains = |a: &[f64], b: &[f64], c: &[f64]| {
            let cross = |o: &[f64], p: &[f64], q: &[f64]| (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0]);
            let d1 = cross(a, b, x);
            let d2 = cross(b, c, x);
            let d3 = cross(c, a, x);
            (d1 >= 0.0 && d2 >= 0.0 && d3 >= 0.0) || (d1 <= 0.0 && d2 <= 0.0 && d3 <= 0.0)
        };
        let k = verts.len();
        for i in 0..k {
            for j in i + 1..k {
                for l in j + 1..k {
                    if tri_contains(&verts[i], &verts[j], &verts[l]) {
                        return 0.0;
                    }
                }
            }
        }
        let mut best = f64::INFINITY;
        for i in 0..k {
            for j in 0..k {
                let (a, b) = (&verts[i], &verts[j]);
                let d = [b[0] - a[0], b[1] - a[1]];
                let len = d[0] * d[0] + d[1] * d[1];
                let t = if len == 0.0 { 0.0 } else { (((x[0] - a[0]) * d[0] + (x[1] - a[1]) * d[1]) / len).clamp(0.0, 1.0) };
                let p = [a[0] + t * d[0] - x[0], a[1] + t * d[1] - x[1]];
                best = best.min(libm::sqrt(p[0] * p[0] + p[1] * p[1]));
            }
        }
        best
    }

    #[test]
    fn rejects_empty_problem() {
        assert!(SimplexLSProblem::new(vec![], vec![0.0]).is_err());
        assert!(SimplexLSProblem::new(vec![vec![1.0]], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn gminimal_holds_for_lasso_and_fused() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (kind, n) in [(PenaltyKind::Lasso, 2), (PenaltyKind::FusedGraph, 3)] {
            let base = build_penalty(&PenaltySpec::new(kind, n, 0.7)).unwrap();
            let g = generate_group(&base, DEFAULT_CAP).unwrap();
            for _ in 0..5 {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
                assert!(gminimal_sample_check(&base, &g, &x, 50, &mut rng).unwrap());
            }
        }
    }

    #[test]
    fn perturbed_fit_is_caught() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let base = build_penalty(&PenaltySpec::new(PenaltyKind::FusedGraph, 4, 0.5)).unwrap();
        let g = generate_group(&base, DEFAULT_CAP).unwrap();
        let x = [1.0, -0.5, 2.0, 0.3];
        let mut u = solve_min_norm(&x, &base, &SolveOptions::default()).unwrap().u;
        for v in &mut u {
            *v += 1e-2;
        }
        assert!(gminimal_failures(&base, &g, &x, &u, 20, &mut rng).unwrap() > 0);
    }
}
