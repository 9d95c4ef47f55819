//! Reflection groups generated by solar bases, and G-majorization.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, mat, norm};
use crate::oracle::{simplex_least_squares, SimplexLSProblem};
use crate::penalty::SolarBase;

/// Default element cap for closure enumeration.
pub const DEFAULT_CAP: usize = 100_000;
/// Largest denominator accepted when deciding rationality of angles.
pub const MAX_DENOMINATOR: u64 = 720;
/// Tolerance on `|q − p/d|` for the rationality decision.
pub const RATIONAL_TOL: f64 = 1e-9;
/// Largest orbit handed to the generic simplex certificate.
pub const MAX_ORBIT: usize = 10_000;

/// Reflection across the hyperplane normal to a unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Reflection {
    normal: Vec<f64>,
}

impl Reflection {
    pub fn new(normal: &[f64]) -> Result<Self> {
        let len = norm(normal);
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::InvalidArgument("reflection normal must be nonzero".into()));
        }
        Ok(Reflection { normal: normal.iter().map(|v| v / len).collect() })
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    /// `x − 2r⟨r, x⟩`
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.normal.len(), x.len())?;
        let s = 2.0 * dot(&self.normal, x);
        Ok(x.iter().zip(&self.normal).map(|(xi, ri)| xi - s * ri).collect())
    }

    pub fn matrix(&self) -> Vec<f64> {
        let n = self.normal.len();
        mat::reflect_left(&self.normal, &mat::identity(n), n)
    }
}

/// Reflects `x` across the hyperplane normal to `r`.
pub fn reflect(r: &Reflection, x: &[f64]) -> Result<Vec<f64>> {
    r.apply(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Finite,
    Infinite,
    Undetermined,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Finite => "finite",
            Verdict::Infinite => "infinite",
            Verdict::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Trivial,
    /// Independent sign changes `(ℤ₂)ᵏ`.
    SignChange,
    /// Permutations within each block (product of symmetric groups).
    Permutation,
    /// Sign changes and permutations within blocks, `(ℤ₂)ᵏ ⋊ 𝒫ₖ` per block.
    SignedPermutation,
    /// Infinite or undetermined group; only the full orthogonal group is assumed.
    OrthogonalFallback,
    UnknownFinite,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Trivial => "trivial",
            Classification::SignChange => "sign-change",
            Classification::Permutation => "permutation",
            Classification::SignedPermutation => "signed-permutation",
            Classification::OrthogonalFallback => "orthogonal-fallback",
            Classification::UnknownFinite => "unknown-finite",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A set of coordinates on which the group acts as the full symmetric group
/// (`signed == false`) or the full signed-permutation group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub coords: Vec<usize>,
    pub signed: bool,
}

impl Block {
    fn order(&self) -> Option<u128> {
        let k = self.coords.len() as u128;
        let mut o: u128 = 1;
        for i in 1..=k {
            o = o.checked_mul(i)?;
            if self.signed {
                o = o.checked_mul(2)?;
            }
        }
        Some(o)
    }

    fn log10_order(&self) -> f64 {
        let k = self.coords.len();
        let mut s = 0.0;
        for i in 1..=k {
            s += libm::log10(i as f64);
        }
        if self.signed {
            s += k as f64 * libm::log10(2.0);
        }
        s
    }
}

/// One entry of the angle table: `cos = ⟨rᵢ, rⱼ⟩` and `q = arccos(cos)/π`.
/// Pairs not listed are orthogonal (`q = 1/2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnglePair {
    pub i: usize,
    pub j: usize,
    pub cos: f64,
    pub q: f64,
    /// `Some((p, d))` when `q` is judged rational.
    pub rational: Option<(u64, u64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupReport {
    pub dim: usize,
    pub verdict: Verdict,
    /// Exact group order, when finite and representable.
    pub order: Option<u128>,
    pub order_log10: Option<f64>,
    /// Row-major `dim × dim` matrices; empty when the group is not finite or
    /// too large to enumerate.
    pub elements: Vec<Vec<f64>>,
    pub classification: Classification,
    /// Block structure backing the fast majorization paths.
    pub blocks: Option<Vec<Block>>,
    pub angles: Vec<AnglePair>,
    /// Distinct generator normals (unit vectors, one per reflection).
    pub generators: Vec<Vec<f64>>,
    /// First pair of base vectors whose angle was judged irrational.
    pub offending_pair: Option<(usize, usize)>,
}

impl GroupReport {
    pub fn is_finite(&self) -> bool {
        self.verdict == Verdict::Finite
    }

    pub fn has_elements(&self) -> bool {
        !self.elements.is_empty()
    }

    /// A copy without the element list (for reports on huge groups).
    pub fn without_elements(&self) -> GroupReport {
        GroupReport { elements: Vec::new(), ..self.clone() }
    }

    /// Applies element `k` to `x`.
    pub fn act(&self, k: usize, x: &[f64]) -> Vec<f64> {
        mat::apply(&self.elements[k], x, self.dim)
    }
}

/// Best rational approximation `p/d` of `q ∈ [0, 1]` with `d ≤ max_den`,
/// accepted when within `tol`.
pub fn rational_approx(q: f64, max_den: u64, tol: f64) -> Option<(u64, u64)> {
    // continued-fraction convergents
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut x = q;
    for _ in 0..64 {
        let a = libm::floor(x);
        if a > 1e12 {
            break;
        }
        let a = a as u64;
        let p2 = a.saturating_mul(p1).saturating_add(p0);
        let q2 = a.saturating_mul(q1).saturating_add(q0);
        if q2 > max_den {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        if libm::fabs(q - p1 as f64 / q1 as f64) <= tol {
            return Some((p1, q1));
        }
        let frac = x - a as f64;
        if frac <= 0.0 {
            break;
        }
        x = 1.0 / frac;
    }
    if q1 > 0 && libm::fabs(q - p1 as f64 / q1 as f64) <= tol {
        Some((p1, q1))
    } else {
        None
    }
}

fn angle_table(base: &SolarBase) -> Vec<AnglePair> {
    // only pairs sharing a coordinate can be non-orthogonal
    let mut touching: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (j, b) in base.bases().iter().enumerate() {
        for &i in &b.idx {
            touching.entry(i).or_default().push(j);
        }
    }
    let mut pairs = BTreeSet::new();
    for list in touching.values() {
        for (a, &i) in list.iter().enumerate() {
            for &j in &list[a + 1..] {
                if i != j {
                    pairs.insert((i.min(j), i.max(j)));
                }
            }
        }
    }
    let mut out = Vec::new();
    for (i, j) in pairs {
        let ri = base.base(i);
        let dense_j = base.dense_base(j);
        let c = ri.dot(&dense_j).clamp(-1.0, 1.0);
        if c == 0.0 {
            continue;
        }
        let q = libm::acos(c) / core::f64::consts::PI;
        out.push(AnglePair { i, j, cos: c, q, rational: rational_approx(q, MAX_DENOMINATOR, RATIONAL_TOL) });
    }
    out
}

/// Distinct reflections: normals deduplicated up to sign.
fn distinct_generators(base: &SolarBase) -> Vec<Vec<f64>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for r in base.dense_bases() {
        // fix the sign so that the first nonzero entry is positive
        let first = r.iter().copied().find(|v| libm::fabs(*v) > 1e-12).unwrap_or(1.0);
        let canon: Vec<f64> = if first < 0.0 { r.iter().map(|v| -v).collect() } else { r.clone() };
        if seen.insert(mat::key(&canon)) {
            out.push(canon);
        }
    }
    out
}

enum GenShape {
    Flip(usize),
    Transposition(usize, usize),
}

fn generator_shape(r: &[f64]) -> Option<GenShape> {
    let nz: Vec<(usize, f64)> =
        r.iter().copied().enumerate().filter(|(_, v)| libm::fabs(*v) > 1e-12).collect();
    match nz.as_slice() {
        [(i, v)] if libm::fabs(libm::fabs(*v) - 1.0) <= 1e-12 => Some(GenShape::Flip(*i)),
        [(i, a), (j, b)] => {
            let h = core::f64::consts::FRAC_1_SQRT_2;
            if libm::fabs(libm::fabs(*a) - h) <= 1e-12 && libm::fabs(a + b) <= 1e-12 {
                Some(GenShape::Transposition(*i, *j))
            } else {
                None
            }
        }
        _ => None,
    }
}

/// Blocks for a base made only of flips `eⱼ` and transpositions
/// `(eⱼ − eᵢ)/√2`: connected components of the transposition graph, signed
/// when the component contains a flip.
fn structural_blocks(dim: usize, generators: &[Vec<f64>]) -> Option<Vec<Block>> {
    let mut parent: Vec<usize> = (0..dim).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let mut flips = vec![false; dim];
    let mut moved = vec![false; dim];
    for g in generators {
        match generator_shape(g)? {
            GenShape::Flip(i) => {
                flips[i] = true;
                moved[i] = true;
            }
            GenShape::Transposition(i, j) => {
                moved[i] = true;
                moved[j] = true;
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut comps: BTreeMap<usize, Block> = BTreeMap::new();
    for i in 0..dim {
        if !moved[i] {
            continue;
        }
        let root = find(&mut parent, i);
        let blk = comps.entry(root).or_insert_with(|| Block { coords: Vec::new(), signed: false });
        blk.coords.push(i);
        blk.signed |= flips[i];
    }
    let mut blocks: Vec<Block> = comps.into_values().collect();
    blocks.sort_by_key(|b| b.coords[0]);
    Some(blocks)
}

fn label_blocks(blocks: &[Block]) -> Classification {
    if blocks.is_empty() {
        Classification::Trivial
    } else if blocks.iter().all(|b| !b.signed) {
        Classification::Permutation
    } else if blocks.iter().all(|b| b.signed && b.coords.len() == 1) {
        Classification::SignChange
    } else {
        Classification::SignedPermutation
    }
}

fn blocks_order(blocks: &[Block]) -> (Option<u128>, f64) {
    let mut order: Option<u128> = Some(1);
    let mut log = 0.0;
    for b in blocks {
        order = order.and_then(|o| b.order().and_then(|bo| o.checked_mul(bo)));
        log += b.log10_order();
    }
    (order, log)
}

/// Breadth-first closure of the generator reflections. `None` when the cap
/// is hit.
fn enumerate(dim: usize, generators: &[Vec<f64>], cap: usize) -> Option<Vec<Vec<f64>>> {
    let id = mat::identity(dim);
    let mut seen = BTreeSet::new();
    seen.insert(mat::key(&id));
    let mut elements = vec![id];
    let mut queue = VecDeque::from([0usize]);
    while let Some(k) = queue.pop_front() {
        for r in generators {
            let prod = mat::reflect_left(r, &elements[k], dim);
            if seen.insert(mat::key(&prod)) {
                if elements.len() >= cap {
                    return None;
                }
                elements.push(prod);
                queue.push_back(elements.len() - 1);
            }
        }
    }
    Some(elements)
}

fn is_signed_permutation(m: &[f64], n: usize) -> bool {
    for i in 0..n {
        let mut count = 0;
        for j in 0..n {
            let v = m[i * n + j];
            if libm::fabs(v) <= 1e-8 {
                continue;
            }
            if libm::fabs(libm::fabs(v) - 1.0) > 1e-8 {
                return false;
            }
            count += 1;
        }
        if count != 1 {
            return false;
        }
    }
    true
}

/// Classifies an enumerated group by inspecting its elements.
fn classify_elements(dim: usize, elements: &[Vec<f64>]) -> (Classification, Option<Vec<Block>>) {
    if elements.len() == 1 {
        return (Classification::Trivial, Some(Vec::new()));
    }
    if !elements.iter().all(|m| is_signed_permutation(m, dim)) {
        return (Classification::UnknownFinite, None);
    }
    // coordinate orbits under |g|
    let mut parent: Vec<usize> = (0..dim).collect();
    let mut signed = vec![false; dim];
    let mut moved = vec![false; dim];
    for m in elements {
        for i in 0..dim {
            for j in 0..dim {
                let v = m[i * dim + j];
                if libm::fabs(v) > 0.5 {
                    if i != j {
                        moved[i] = true;
                        moved[j] = true;
                        let (mut a, mut b) = (i, j);
                        while parent[a] != a {
                            a = parent[a];
                        }
                        while parent[b] != b {
                            b = parent[b];
                        }
                        if a != b {
                            parent[a] = b;
                        }
                    }
                    if v < 0.0 {
                        signed[i] = true;
                        moved[i] = true;
                    }
                }
            }
        }
    }
    let mut comps: BTreeMap<usize, Block> = BTreeMap::new();
    for i in 0..dim {
        if !moved[i] {
            continue;
        }
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        let blk = comps.entry(r).or_insert_with(|| Block { coords: Vec::new(), signed: false });
        blk.coords.push(i);
        blk.signed |= signed[i];
    }
    let mut blocks: Vec<Block> = comps.into_values().collect();
    blocks.sort_by_key(|b| b.coords[0]);
    match blocks_order(&blocks).0 {
        Some(o) if o == elements.len() as u128 => (label_blocks(&blocks), Some(blocks)),
        // a proper subgroup of the block product, e.g. even sign changes
        _ => (Classification::UnknownFinite, None),
    }
}

/// Generates the reflection group of `base` and decides whether it is finite.
///
/// Angles between base vectors are tested for rationality first; an
/// irrational `arccos(⟨rᵢ, rⱼ⟩)/π` proves the group infinite. Otherwise
/// bases made of coordinate flips and transpositions are identified
/// directly, and anything else is enumerated by closure up to `cap`
/// elements.
pub fn generate_group(base: &SolarBase, cap: usize) -> Result<GroupReport> {
    if cap < 2 {
        return Err(Error::InvalidArgument("cap must be at least 2".into()));
    }
    let dim = base.dim();
    let angles = angle_table(base);
    let generators = distinct_generators(base);
    let mut report = GroupReport {
        dim,
        verdict: Verdict::Undetermined,
        order: None,
        order_log10: None,
        elements: Vec::new(),
        classification: Classification::OrthogonalFallback,
        blocks: None,
        angles,
        generators,
        offending_pair: None,
    };
    if let Some(p) = report.angles.iter().find(|p| p.rational.is_none()) {
        report.verdict = Verdict::Infinite;
        report.offending_pair = Some((p.i, p.j));
        return Ok(report);
    }

    if let Some(blocks) = structural_blocks(dim, &report.generators) {
        let (order, log) = blocks_order(&blocks);
        report.verdict = Verdict::Finite;
        report.order = order;
        report.order_log10 = Some(log);
        report.classification = label_blocks(&blocks);
        if matches!(order, Some(o) if o <= cap as u128) {
            if let Some(el) = enumerate(dim, &report.generators, cap) {
                report.order = Some(el.len() as u128);
                report.order_log10 = Some(libm::log10(el.len() as f64));
                report.elements = el;
            }
        }
        report.blocks = Some(blocks);
        return Ok(report);
    }

    match enumerate(dim, &report.generators, cap) {
        Some(el) => {
            let (class, blocks) = classify_elements(dim, &el);
            report.verdict = Verdict::Finite;
            report.order = Some(el.len() as u128);
            report.order_log10 = Some(libm::log10(el.len() as f64));
            report.classification = class;
            report.blocks = blocks;
            report.elements = el;
        }
        None => {
            report.verdict = Verdict::Undetermined;
        }
    }
    Ok(report)
}

/// The orbit `G·y`, deduplicated.
pub fn orbit(report: &GroupReport, y: &[f64]) -> Result<Vec<Vec<f64>>> {
    check_dim(report.dim, y.len())?;
    if !report.is_finite() {
        return Err(Error::NonFiniteGroup);
    }
    if !report.has_elements() {
        return Err(Error::OrbitTooLarge {
            size: report.order.map(|o| o.min(usize::MAX as u128) as usize).unwrap_or(usize::MAX),
            limit: MAX_ORBIT,
        });
    }
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for k in 0..report.elements.len() {
        let p = report.act(k, y);
        if seen.insert(mat::key(&p)) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Evidence attached to a majorization decision.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// Simplex weights over the orbit points returned by [`orbit`].
    Weights { orbit: Vec<Vec<f64>>, weights: Vec<f64>, residual: f64 },
    /// A direction `u` with `⟨u, x⟩ > h_{G·y}(u)`.
    Direction(Vec<f64>),
    /// Decided by the block characterization; no certificate computed.
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MajorizationVerdict {
    pub holds: bool,
    pub certificate: Certificate,
    /// True when the block characterization decided the question.
    pub fast_path: bool,
}

fn tolerance(y: &[f64]) -> f64 {
    1e-9 * (1.0 + norm(y))
}

/// Partial sums of `v` sorted in decreasing order.
fn sorted_partial_sums(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    v.into_iter()
        .map(|t| {
            acc += t;
            acc
        })
        .collect()
}

/// Indices of the `k` largest entries of `v`.
fn top_k(v: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[b].total_cmp(&v[a]));
    idx.truncate(k);
    idx
}

fn majorizes_blocks(blocks: &[Block], x: &[f64], y: &[f64]) -> MajorizationVerdict {
    let n = x.len();
    let tol = tolerance(y);
    let fail = |u: Vec<f64>| MajorizationVerdict {
        holds: false,
        certificate: Certificate::Direction(u),
        fast_path: true,
    };
    let mut covered = vec![false; n];
    for b in blocks {
        for &i in &b.coords {
            covered[i] = true;
        }
    }
    for i in 0..n {
        if !covered[i] && libm::fabs(x[i] - y[i]) > tol {
            let mut u = vec![0.0; n];
            u[i] = if x[i] > y[i] { 1.0 } else { -1.0 };
            return fail(u);
        }
    }
    for b in blocks {
        let xb: Vec<f64> = b.coords.iter().map(|&i| x[i]).collect();
        let yb: Vec<f64> = b.coords.iter().map(|&i| y[i]).collect();
        if b.signed {
            let ax: Vec<f64> = xb.iter().map(|v| libm::fabs(*v)).collect();
            let ay: Vec<f64> = yb.iter().map(|v| libm::fabs(*v)).collect();
            let (px, py) = (sorted_partial_sums(ax.clone()), sorted_partial_sums(ay));
            if let Some(k) = (0..px.len()).find(|&k| px[k] > py[k] + tol) {
                let mut u = vec![0.0; n];
                for t in top_k(&ax, k + 1) {
                    let i = b.coords[t];
                    u[i] = if x[i] >= 0.0 { 1.0 } else { -1.0 };
                }
                return fail(u);
            }
        } else {
            let (px, py) = (sorted_partial_sums(xb.clone()), sorted_partial_sums(yb));
            let last = px.len() - 1;
            if libm::fabs(px[last] - py[last]) > tol {
                let sign = if px[last] > py[last] { 1.0 } else { -1.0 };
                let mut u = vec![0.0; n];
                for &i in &b.coords {
                    u[i] = sign;
                }
                return fail(u);
            }
            if let Some(k) = (0..last).find(|&k| px[k] > py[k] + tol) {
                let mut u = vec![0.0; n];
                for t in top_k(&xb, k + 1) {
                    u[b.coords[t]] = 1.0;
                }
                return fail(u);
            }
        }
    }
    MajorizationVerdict { holds: true, certificate: Certificate::None, fast_path: true }
}

/// Decides `x ⪯_G y` through the simplex least-squares certificate over the
/// orbit of `y`, regardless of classification.
pub fn majorizes_generic(report: &GroupReport, x: &[f64], y: &[f64]) -> Result<MajorizationVerdict> {
    check_dim(report.dim, x.len())?;
    check_dim(report.dim, y.len())?;
    let pts = orbit(report, y)?;
    if pts.len() > MAX_ORBIT {
        return Err(Error::OrbitTooLarge { size: pts.len(), limit: MAX_ORBIT });
    }
    let sol = simplex_least_squares(&SimplexLSProblem::new(pts.clone(), x.to_vec())?, 1e-8)?;
    if sol.residual <= 1e-6 * (1.0 + norm(y)) {
        Ok(MajorizationVerdict {
            holds: true,
            certificate: Certificate::Weights { orbit: pts, weights: sol.weights, residual: sol.residual },
            fast_path: false,
        })
    } else {
        let u: Vec<f64> = x.iter().zip(&sol.point).map(|(a, b)| a - b).collect();
        Ok(MajorizationVerdict { holds: false, certificate: Certificate::Direction(u), fast_path: false })
    }
}

/// Decides `x ⪯_G y`, i.e. `x ∈ conv(G·y)`.
///
/// Groups with block structure use the sorted partial-sum tests: classical
/// majorization on permutation blocks and weak majorization of absolute
/// values on signed blocks. Other finite groups go through
/// [`majorizes_generic`].
pub fn majorizes(report: &GroupReport, x: &[f64], y: &[f64]) -> Result<MajorizationVerdict> {
    check_dim(report.dim, x.len())?;
    check_dim(report.dim, y.len())?;
    if !report.is_finite() {
        return Err(Error::NonFiniteGroup);
    }
    match &report.blocks {
        Some(blocks) => Ok(majorizes_blocks(blocks, x, y)),
        None => majorizes_generic(report, x, y),
    }
}
