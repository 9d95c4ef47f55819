#![allow(dead_code)]

use rand::Rng;
use solar_core::{build_penalty, PenaltyKind, PenaltySpec, SolarBase};

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let v: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

pub fn gaussian_vec<R: Rng>(rng: &mut R, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * gaussian(rng)).collect()
}

/// Random connected graph on `n` vertices, 1-based edges: a random spanning
/// tree plus `extra` random edges.
pub fn random_connected_graph<R: Rng>(rng: &mut R, n: usize, extra: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for v in 2..=n {
        let u = rng.gen_range(1..v);
        edges.push((u, v));
    }
    let mut added = 0;
    while added < extra {
        let a = rng.gen_range(1..=n);
        let b = rng.gen_range(1..=n);
        if a != b && !edges.contains(&(a, b)) && !edges.contains(&(b, a)) {
            edges.push((a.min(b), a.max(b)));
            added += 1;
        }
    }
    edges
}

pub fn base(kind: PenaltyKind, n: usize, lambda: f64) -> SolarBase {
    build_penalty(&PenaltySpec::new(kind, n, lambda)).unwrap()
}

/// Feasible dual coefficients drawn uniformly from the intervals truncated
/// to `[-m, m]`.
pub fn random_alpha<R: Rng>(rng: &mut R, b: &SolarBase, m: f64) -> Vec<f64> {
    b.intervals()
        .iter()
        .map(|iv| {
            let lo = iv.lo().max(-m);
            let hi = iv.hi().min(m);
            if lo == hi {
                lo
            } else {
                rng.gen_range(lo..=hi)
            }
        })
        .collect()
}
