//! Base representation of solar penalties.
//!
//! A solar penalty with base `(B, Λ)` has support set
//! `Z(B, Λ) = { Σ λⱼ rⱼ : λⱼ ∈ Iⱼ }` and evaluates as the support function
//! `h(θ) = sup_{z ∈ Z} ⟨z, θ⟩`, which splits into one term per summand.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{norm, SparseVec};

const SQRT2: f64 = core::f64::consts::SQRT_2;

/// A closed interval of the extended real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtInterval {
    lo: f64,
    hi: f64,
}

impl ExtInterval {
    /// `lo` may be `-inf` and `hi` may be `+inf`; the interval must be nonempty.
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY
        {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(ExtInterval { lo, hi })
    }

    pub fn symmetric(radius: f64) -> Result<Self> {
        Self::new(-radius, radius)
    }

    pub fn point(v: f64) -> Result<Self> {
        Self::new(v, v)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn is_degenerate_zero(&self) -> bool {
        self.lo == 0.0 && self.hi == 0.0
    }

    pub fn clip(&self, t: f64) -> f64 {
        t.max(self.lo).min(self.hi)
    }

    /// The point of the interval closest to zero.
    pub fn nearest_to_zero(&self) -> f64 {
        self.clip(0.0)
    }

    /// `sup_{t ∈ I} t·s`, with the summand taken as 0 when `s == 0`.
    pub fn support(&self, s: f64) -> f64 {
        if s > 0.0 {
            if self.hi == f64::INFINITY {
                f64::INFINITY
            } else {
                self.hi * s
            }
        } else if s < 0.0 {
            if self.lo == f64::NEG_INFINITY {
                f64::INFINITY
            } else {
                self.lo * s
            }
        } else {
            0.0
        }
    }

    pub fn scaled(&self, factor: f64) -> ExtInterval {
        debug_assert!(factor >= 0.0);
        let scale = |v: f64| if v.is_infinite() { v } else { v * factor };
        ExtInterval { lo: scale(self.lo), hi: scale(self.hi) }
    }
}

impl fmt::Display for ExtInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Base representation `(B, Λ)` of a solar penalty: unit vectors paired
/// with closed, possibly unbounded, intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct SolarBase {
    dim: usize,
    bases: Vec<SparseVec>,
    intervals: Vec<ExtInterval>,
}

impl SolarBase {
    /// Builds a base from arbitrary nonzero directions. Each direction is
    /// normalized and its interval rescaled by the original length, so the
    /// support set is unchanged.
    pub fn new(dim: usize, bases: Vec<Vec<f64>>, intervals: Vec<ExtInterval>) -> Result<Self> {
        let sparse = bases
            .iter()
            .map(|b| {
                check_dim(dim, b.len())?;
                Ok(SparseVec::from_dense(b))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_sparse(dim, sparse, intervals)
    }

    pub(crate) fn from_sparse(
        dim: usize,
        mut bases: Vec<SparseVec>,
        mut intervals: Vec<ExtInterval>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".to_string()));
        }
        if bases.len() != intervals.len() {
            return Err(Error::LengthMismatch { bases: bases.len(), intervals: intervals.len() });
        }
        if bases.is_empty() {
            return Err(Error::EmptyBase);
        }
        for (j, (b, iv)) in bases.iter_mut().zip(intervals.iter_mut()).enumerate() {
            if b.idx.iter().any(|&i| i >= dim) {
                return Err(Error::DimensionMismatch { expected: dim, got: b.idx.len() });
            }
            let len = b.norm();
            if !(len > 0.0) || !len.is_finite() {
                return Err(Error::ZeroBaseVector(j));
            }
            if (len - 1.0).abs() > 1e-12 {
                b.scale(1.0 / len);
                *iv = iv.scaled(len);
            }
        }
        Ok(SolarBase { dim, bases, intervals })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of base vectors `m`.
    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn base(&self, j: usize) -> &SparseVec {
        &self.bases[j]
    }

    pub fn bases(&self) -> &[SparseVec] {
        &self.bases
    }

    pub fn interval(&self, j: usize) -> ExtInterval {
        self.intervals[j]
    }

    pub fn intervals(&self) -> &[ExtInterval] {
        &self.intervals
    }

    pub fn dense_base(&self, j: usize) -> Vec<f64> {
        self.bases[j].to_dense(self.dim)
    }

    pub fn dense_bases(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|j| self.dense_base(j)).collect()
    }

    pub fn all_bounded(&self) -> bool {
        self.intervals.iter().all(ExtInterval::is_bounded)
    }

    /// Support function `h(θ) = Σⱼ sup_{t ∈ Iⱼ} t⟨rⱼ, θ⟩`.
    pub fn support_function(&self, theta: &[f64]) -> Result<f64> {
        self.support_function_with_slack(theta, 0.0)
    }

    /// Support function where a term that would be infinite counts as zero
    /// when `|⟨rⱼ, θ⟩| ≤ slack`. Used to evaluate hard-constraint penalties
    /// at numerically computed fits.
    pub fn support_function_with_slack(&self, theta: &[f64], slack: f64) -> Result<f64> {
        check_dim(self.dim, theta.len())?;
        let mut total = 0.0;
        for (b, iv) in self.bases.iter().zip(&self.intervals) {
            let s = b.dot(theta);
            let mut term = iv.support(s);
            if term == f64::INFINITY && s.abs() <= slack {
                term = 0.0;
            }
            total += term;
            if total == f64::INFINITY {
                return Ok(f64::INFINITY);
            }
        }
        Ok(total)
    }

    /// The point `Σⱼ λⱼ rⱼ` of the support set.
    pub fn combine(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.len(), coeffs.len())?;
        let mut z = vec![0.0; self.dim];
        for (b, c) in self.bases.iter().zip(coeffs) {
            if *c != 0.0 {
                b.axpy(*c, &mut z);
            }
        }
        Ok(z)
    }

    /// The same base with every interval multiplied by `factor ≥ 0`; the
    /// support function scales by `factor`.
    pub fn scaled(&self, factor: f64) -> SolarBase {
        SolarBase {
            dim: self.dim,
            bases: self.bases.clone(),
            intervals: self.intervals.iter().map(|iv| iv.scaled(factor)).collect(),
        }
    }
}

/// Penalties that can be built from a high-level description.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PenaltyKind {
    Lasso,
    Nonneg,
    FusedGraph,
    IsotonicGraph,
    NearlyIsotonicGraph,
    TrendFilter,
    SparseFused,
    CustomMatrix,
}

impl PenaltyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PenaltyKind::Lasso => "lasso",
            PenaltyKind::Nonneg => "nonneg",
            PenaltyKind::FusedGraph => "fused-graph",
            PenaltyKind::IsotonicGraph => "isotonic-graph",
            PenaltyKind::NearlyIsotonicGraph => "nearly-isotonic-graph",
            PenaltyKind::TrendFilter => "trend-filter",
            PenaltyKind::SparseFused => "sparse-fused",
            PenaltyKind::CustomMatrix => "custom-matrix",
        }
    }

    pub fn is_graph(&self) -> bool {
        matches!(
            self,
            PenaltyKind::FusedGraph
                | PenaltyKind::IsotonicGraph
                | PenaltyKind::NearlyIsotonicGraph
                | PenaltyKind::SparseFused
        )
    }
}

impl fmt::Display for PenaltyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PenaltyKind {
    type Err = Error;

    /// Accepts the canonical names plus the chain aliases
    /// (`fused-chain`, `isotonic-chain`, ...), which build the same kind
    /// with the default chain edge set.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "lasso" => PenaltyKind::Lasso,
            "nonneg" | "nonnegative" => PenaltyKind::Nonneg,
            "fused-graph" | "fused-chain" | "fused" | "fused-path" => PenaltyKind::FusedGraph,
            "isotonic-graph" | "isotonic-chain" | "isotonic" => PenaltyKind::IsotonicGraph,
            "nearly-isotonic-graph" | "nearly-isotonic-chain" | "nearly-isotonic" => {
                PenaltyKind::NearlyIsotonicGraph
            }
            "trend-filter" => PenaltyKind::TrendFilter,
            "sparse-fused" => PenaltyKind::SparseFused,
            "custom-matrix" => PenaltyKind::CustomMatrix,
            other => return Err(Error::InvalidSpec(alloc::format!("unknown penalty kind `{other}`"))),
        })
    }
}

/// High-level penalty description. Edges use 1-based vertex indices, as in
/// the file format.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltySpec {
    pub kind: PenaltyKind,
    pub n: usize,
    pub lambda: Vec<f64>,
    /// `None` means the chain `1-2, 2-3, ..., (n-1)-n` for graph penalties.
    pub edges: Option<Vec<(usize, usize)>>,
    pub matrix: Option<Vec<Vec<f64>>>,
}

impl PenaltySpec {
    pub fn new(kind: PenaltyKind, n: usize, lambda: f64) -> Self {
        PenaltySpec { kind, n, lambda: vec![lambda], edges: None, matrix: None }
    }

    pub fn with_edges(mut self, edges: Vec<(usize, usize)>) -> Self {
        self.edges = Some(edges);
        self
    }

    pub fn with_lambdas(mut self, lambda: Vec<f64>) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_matrix(mut self, matrix: Vec<Vec<f64>>) -> Self {
        self.matrix = Some(matrix);
        self
    }

    /// True for graph penalties using the default chain.
    pub fn is_chain(&self) -> bool {
        match &self.edges {
            None => true,
            Some(e) => {
                e.len() + 1 == self.n && e.iter().enumerate().all(|(k, &(i, j))| i == k + 1 && j == k + 2)
            }
        }
    }

    fn lambda_at(&self, k: usize) -> Result<f64> {
        let lam = match self.lambda.get(k).or_else(|| self.lambda.first()) {
            Some(l) => *l,
            None => return Err(Error::InvalidSpec(alloc::format!("{} needs lambda", self.kind))),
        };
        if !(lam >= 0.0) || !lam.is_finite() {
            return Err(Error::InvalidSpec(alloc::format!("lambda must be finite and >= 0, got {lam}")));
        }
        Ok(lam)
    }

    /// Zero-based edges after validation.
    fn edges0(&self) -> Result<Vec<(usize, usize)>> {
        match &self.edges {
            None => {
                if self.n < 2 {
                    return Err(Error::EmptyEdgeSet);
                }
                Ok((0..self.n - 1).map(|i| (i, i + 1)).collect())
            }
            Some(e) => {
                if e.is_empty() {
                    return Err(Error::EmptyEdgeSet);
                }
                e.iter()
                    .map(|&(i, j)| {
                        if i == 0 || j == 0 || i > self.n || j > self.n || i == j {
                            Err(Error::InvalidEdge(i, j))
                        } else {
                            Ok((i - 1, j - 1))
                        }
                    })
                    .collect()
            }
        }
    }
}

fn unit(j: usize) -> SparseVec {
    SparseVec { idx: vec![j], val: vec![1.0] }
}

/// `(e_j − e_i)/√2` for the edge `(i, j)`.
fn edge_vector(i: usize, j: usize) -> SparseVec {
    let inv = 1.0 / SQRT2;
    SparseVec { idx: vec![i, j], val: vec![-inv, inv] }
}

fn lasso_parts(n: usize, lam: f64) -> Result<(Vec<SparseVec>, Vec<ExtInterval>)> {
    let iv = ExtInterval::symmetric(lam)?;
    Ok(((0..n).map(unit).collect(), vec![iv; n]))
}

fn graph_parts(edges: &[(usize, usize)], iv: ExtInterval) -> (Vec<SparseVec>, Vec<ExtInterval>) {
    (edges.iter().map(|&(i, j)| edge_vector(i, j)).collect(), vec![iv; edges.len()])
}

/// Builds the base representation of a named penalty. Interval radii are
/// scaled so the support function equals the conventional penalty, e.g.
/// `λ Σ |θⱼ − θᵢ|` for the graph fused lasso.
pub fn build_penalty(spec: &PenaltySpec) -> Result<SolarBase> {
    let n = spec.n;
    if n == 0 {
        return Err(Error::InvalidSpec("n must be positive".to_string()));
    }
    for l in &spec.lambda {
        if !(*l >= 0.0) {
            return Err(Error::InvalidSpec(alloc::format!("lambda must be >= 0, got {l}")));
        }
    }
    let (bases, intervals) = match spec.kind {
        PenaltyKind::Lasso => lasso_parts(n, spec.lambda_at(0)?)?,
        PenaltyKind::Nonneg => {
            let lo = if spec.lambda.is_empty() { f64::NEG_INFINITY } else { -spec.lambda_at(0)? };
            ((0..n).map(unit).collect(), vec![ExtInterval::new(lo, 0.0)?; n])
        }
        PenaltyKind::FusedGraph => {
            let r = spec.lambda_at(0)? * SQRT2;
            graph_parts(&spec.edges0()?, ExtInterval::symmetric(r)?)
        }
        PenaltyKind::IsotonicGraph => {
            graph_parts(&spec.edges0()?, ExtInterval::new(f64::NEG_INFINITY, 0.0)?)
        }
        PenaltyKind::NearlyIsotonicGraph => {
            let r = spec.lambda_at(0)? * SQRT2;
            graph_parts(&spec.edges0()?, ExtInterval::new(-r, 0.0)?)
        }
        PenaltyKind::TrendFilter => {
            if n < 3 {
                return Err(Error::InvalidSpec("trend filtering needs n >= 3".to_string()));
            }
            let s6 = libm::sqrt(6.0);
            let r = spec.lambda_at(0)? * s6;
            let bases = (0..n - 2)
                .map(|j| SparseVec {
                    idx: vec![j, j + 1, j + 2],
                    val: vec![1.0 / s6, -2.0 / s6, 1.0 / s6],
                })
                .collect();
            (bases, vec![ExtInterval::symmetric(r)?; n - 2])
        }
        PenaltyKind::SparseFused => {
            let (mut b, mut iv) = lasso_parts(n, spec.lambda_at(0)?)?;
            let r = spec.lambda_at(1)? * SQRT2;
            let (fb, fiv) = graph_parts(&spec.edges0()?, ExtInterval::symmetric(r)?);
            b.extend(fb);
            iv.extend(fiv);
            (b, iv)
        }
        PenaltyKind::CustomMatrix => {
            let rows = spec
                .matrix
                .as_ref()
                .ok_or_else(|| Error::InvalidSpec("custom-matrix needs a matrix".to_string()))?;
            if rows.is_empty() {
                return Err(Error::EmptyBase);
            }
            let lam = spec.lambda_at(0)?;
            let mut bases = Vec::with_capacity(rows.len());
            let mut intervals = Vec::with_capacity(rows.len());
            for (k, row) in rows.iter().enumerate() {
                check_dim(n, row.len())?;
                let len = norm(row);
                if len == 0.0 {
                    return Err(Error::ZeroRow(k));
                }
                if !len.is_finite() {
                    return Err(Error::InvalidSpec(alloc::format!("row {k} is not finite")));
                }
                let unit_row: Vec<f64> = row.iter().map(|v| v / len).collect();
                bases.push(SparseVec::from_dense(&unit_row));
                intervals.push(ExtInterval::symmetric(lam * len)?);
            }
            (bases, intervals)
        }
    };
    SolarBase::from_sparse(n, bases, intervals)
}

/// Minkowski sum of the two support sets: concatenated bases and intervals.
pub fn sum_penalties(a: &SolarBase, b: &SolarBase) -> Result<SolarBase> {
    check_dim(a.dim, b.dim)?;
    let mut bases = a.bases.clone();
    bases.extend(b.bases.iter().cloned());
    let mut intervals = a.intervals.clone();
    intervals.extend(b.intervals.iter().copied());
    Ok(SolarBase { dim: a.dim, bases, intervals })
}
