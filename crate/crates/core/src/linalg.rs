//! Small dense and sparse vector kernels.

use alloc::vec;
use alloc::vec::Vec;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(norm_sq(a))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| libm::fabs(x - y))
        .fold(0.0, f64::max)
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// A sparse vector stored as parallel index/value arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVec {
    pub idx: Vec<usize>,
    pub val: Vec<f64>,
}

impl SparseVec {
    /// Keeps the nonzero entries of a dense vector.
    pub fn from_dense(v: &[f64]) -> Self {
        let (idx, val) = v
            .iter()
            .enumerate()
            .filter(|(_, x)| **x != 0.0)
            .map(|(i, x)| (i, *x))
            .unzip();
        SparseVec { idx, val }
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (i, v) in self.idx.iter().zip(&self.val) {
            out[*i] += v;
        }
        out
    }

    #[inline]
    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.idx.iter().zip(&self.val).map(|(i, v)| v * dense[*i]).sum()
    }

    /// `dense += a * self`
    #[inline]
    pub fn axpy(&self, a: f64, dense: &mut [f64]) {
        for (i, v) in self.idx.iter().zip(&self.val) {
            dense[*i] += a * v;
        }
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.val.iter().map(|v| v * v).sum())
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.val {
            *v *= s;
        }
    }
}

/// Row-major square matrix helpers used by the group enumeration.
pub mod mat {
    use alloc::vec;
    use alloc::vec::Vec;

    pub fn identity(n: usize) -> Vec<f64> {
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            m[i * n + i] = 1.0;
        }
        m
    }

    pub fn mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let aik = a[i * n + k];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += aik * b[k * n + j];
                }
            }
        }
        out
    }

    pub fn apply(m: &[f64], x: &[f64], n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| super::dot(&m[i * n..(i + 1) * n], x))
            .collect()
    }

    pub fn transpose(m: &[f64], n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[j * n + i] = m[i * n + j];
            }
        }
        out
    }

    /// `S_r * m` for the reflection along the unit vector `r`.
    pub fn reflect_left(r: &[f64], m: &[f64], n: usize) -> Vec<f64> {
        let mut rt_m = vec![0.0; n];
        for (k, rk) in r.iter().enumerate() {
            if *rk == 0.0 {
                continue;
            }
            for j in 0..n {
                rt_m[j] += rk * m[k * n + j];
            }
        }
        let mut out = m.to_vec();
        for (i, ri) in r.iter().enumerate() {
            if *ri == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] -= 2.0 * ri * rt_m[j];
            }
        }
        out
    }

    /// Deduplication key: entries rounded to 8 decimals.
    pub fn key(m: &[f64]) -> Vec<i64> {
        m.iter()
            .map(|x| {
                let k = libm::round(x * 1e8) as i64;
                // fold -0 and 0 together
                if k == 0 {
                    0
                } else {
                    k
                }
            })
            .collect()
    }

    pub fn max_abs_dev_from_identity(m: &[f64], n: usize) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max(libm::fabs(m[i * n + j] - target));
            }
        }
        worst
    }
}

/// Solves a small dense symmetric system by Gaussian elimination with
/// partial pivoting. Returns `None` when the matrix is numerically singular.
pub fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v))).max(1.0);
    for col in 0..n {
        let mut piv = col;
        for row in col + 1..n {
            if libm::fabs(a[row * n + col]) > libm::fabs(a[piv * n + col]) {
                piv = row;
            }
        }
        if libm::fabs(a[piv * n + col]) <= 1e-14 * scale {
            return None;
        }
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                a[row * n + j] -= f * a[col * n + j];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= a[i * n + j] * x[j];
        }
        x[i] = s / a[i * n + i];
    }
    Some(x)
}
