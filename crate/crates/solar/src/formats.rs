//! File formats: penalty specs as JSON, signals and edge lists as headerless
//! CSV, solver traces as CSV, and the JSON shapes of every report. Indices
//! are 1-based in every file.

use serde::{Deserialize, Serialize};
use solar_core::{
    Block, FitReport, GroupReport, PenaltyKind, PenaltySpec, TraceRecord,
};
use std::io::{Read, Write};
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {msg}")]
    Parse { path: String, msg: String },
}

fn io_err(path: &Path, source: std::io::Error) -> FormatError {
    FormatError::Io { path: path.display().to_string(), source }
}

fn parse_err(path: &Path, msg: impl ToString) -> FormatError {
    FormatError::Parse { path: path.display().to_string(), msg: msg.to_string() }
}

/// `lambda` may be a single number or a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Lambda {
    One(f64),
    Many(Vec<f64>),
}

impl Lambda {
    pub fn into_vec(self) -> Vec<f64> {
        match self {
            Lambda::One(v) => vec![v],
            Lambda::Many(v) => v,
        }
    }
}

/// On-disk penalty description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltyFile {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Lambda>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
}

impl PenaltyFile {
    /// Resolves to a spec. `n` falls back to `default_n` (the data length),
    /// then to the matrix width.
    pub fn to_spec(&self, default_n: Option<usize>) -> Result<PenaltySpec, String> {
        let kind: PenaltyKind = self.kind.parse().map_err(|e: solar_core::Error| e.to_string())?;
        let n = self
            .n
            .or(default_n)
            .or_else(|| self.matrix.as_ref().and_then(|m| m.first().map(|r| r.len())))
            .ok_or("penalty needs `n` (or data to infer it from)")?;
        let lambda = self.lambda.clone().map(Lambda::into_vec).unwrap_or_else(|| match kind {
            PenaltyKind::Nonneg | PenaltyKind::IsotonicGraph => vec![0.0],
            _ => vec![1.0],
        });
        let mut spec = PenaltySpec::new(kind, n, 0.0).with_lambdas(lambda);
        if let Some(e) = &self.edges {
            spec = spec.with_edges(e.iter().map(|p| (p[0], p[1])).collect());
        }
        if let Some(m) = &self.matrix {
            spec = spec.with_matrix(m.clone());
        }
        Ok(spec)
    }

    pub fn from_spec(spec: &PenaltySpec) -> Self {
        PenaltyFile {
            kind: spec.kind.as_str().to_string(),
            n: Some(spec.n),
            lambda: Some(if spec.lambda.len() == 1 {
                Lambda::One(spec.lambda[0])
            } else {
                Lambda::Many(spec.lambda.clone())
            }),
            edges: spec.edges.as_ref().map(|e| e.iter().map(|&(i, j)| [i, j]).collect()),
            matrix: spec.matrix.clone(),
        }
    }
}

pub fn parse_penalty_json(text: &str) -> Result<PenaltyFile, String> {
    serde_json::from_str(text).map_err(|e| e.to_string())
}

pub fn read_penalty(path: &Path) -> Result<PenaltyFile, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_penalty_json(&text).map_err(|m| parse_err(path, m))
}

fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(false)
        .from_reader(r)
}

/// One value per line.
pub fn parse_signal<R: Read>(r: R) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for (k, rec) in csv_reader(r).records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        if rec.len() != 1 {
            return Err(format!("line {}: expected one column, found {}", k + 1, rec.len()));
        }
        let v: f64 = rec[0].parse().map_err(|_| format!("line {}: `{}` is not a number", k + 1, &rec[0]))?;
        if !v.is_finite() {
            return Err(format!("line {}: value must be finite", k + 1));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err("no data".into());
    }
    Ok(out)
}

pub fn read_signal(path: &Path) -> Result<Vec<f64>, FormatError> {
    let f = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    parse_signal(f).map_err(|m| parse_err(path, m))
}

/// Two 1-based vertex indices per line.
pub fn parse_edges<R: Read>(r: R) -> Result<Vec<(usize, usize)>, String> {
    let mut out = Vec::new();
    for (k, rec) in csv_reader(r).records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        if rec.len() != 2 {
            return Err(format!("line {}: expected two columns, found {}", k + 1, rec.len()));
        }
        let p = |s: &str| -> Result<usize, String> {
            match s.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v),
                _ => Err(format!("line {}: `{s}` is not a 1-based vertex index", k + 1)),
            }
        };
        out.push((p(&rec[0])?, p(&rec[1])?));
    }
    Ok(out)
}

pub fn read_edges(path: &Path) -> Result<Vec<(usize, usize)>, FormatError> {
    let f = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    parse_edges(f).map_err(|m| parse_err(path, m))
}

/// Streams trace records as `sweep,j,alpha_old,alpha_new,c,norm_y` with a
/// header row; `j` is 1-based.
pub struct TraceWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(w: W) -> csv::Result<Self> {
        let mut inner = csv::Writer::from_writer(w);
        inner.write_record(["sweep", "j", "alpha_old", "alpha_new", "c", "norm_y"])?;
        Ok(TraceWriter { inner })
    }

    pub fn write(&mut self, r: &TraceRecord) -> csv::Result<()> {
        self.inner.write_record([
            r.sweep.to_string(),
            (r.j + 1).to_string(),
            format!("{:.16e}", r.alpha_old),
            format!("{:.16e}", r.alpha_new),
            format!("{:.16e}", r.c),
            format!("{:.16e}", r.norm_y),
        ])
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        self.inner.flush()?;
        self.inner.into_inner().map_err(|e| e.into_error())
    }
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitJson {
    pub family: String,
    pub penalty: String,
    pub n: usize,
    pub lambda: Vec<f64>,
    pub method: String,
    pub u: Vec<f64>,
    pub t: Option<Vec<f64>>,
    pub classification: String,
    pub verdict: String,
    pub group_order: Option<u128>,
    pub group_order_log10: Option<f64>,
    pub invariance: String,
    pub sweeps: Option<usize>,
    pub converged: bool,
    pub kkt_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub change_points: Option<Vec<usize>>,
    pub boundary: Vec<usize>,
}

impl From<&FitReport> for FitJson {
    fn from(r: &FitReport) -> Self {
        FitJson {
            family: r.family.as_str().into(),
            penalty: r.penalty.as_str().into(),
            n: r.n,
            lambda: r.lambda.clone(),
            method: r.method.as_str().into(),
            u: r.u.clone(),
            t: r.t.clone(),
            classification: r.classification.as_str().into(),
            verdict: r.verdict.as_str().into(),
            group_order: r.group_order,
            group_order_log10: r.group_order_log10,
            invariance: r.invariance.as_str().into(),
            sweeps: r.sweeps,
            converged: r.converged,
            kkt_residual: r.kkt_residual,
            change_points: r.change_points.as_deref().map(one_based),
            boundary: one_based(&r.boundary),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockJson {
    pub coords: Vec<usize>,
    pub signed: bool,
}

impl From<&Block> for BlockJson {
    fn from(b: &Block) -> Self {
        BlockJson { coords: one_based(&b.coords), signed: b.signed }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AngleJson {
    pub i: usize,
    pub j: usize,
    pub cos: f64,
    pub q: f64,
    /// `[p, d]` with `q = p/d`, when judged rational.
    pub rational: Option<[u64; 2]>,
}

/// Groups above this order are reported without their element list.
pub const MAX_LISTED_ORDER: u128 = 1000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupJson {
    pub dim: usize,
    pub verdict: String,
    pub order: Option<u128>,
    pub order_log10: Option<f64>,
    pub classification: String,
    pub blocks: Option<Vec<BlockJson>>,
    pub angles: Vec<AngleJson>,
    pub generators: Vec<Vec<f64>>,
    pub offending_pair: Option<[usize; 2]>,
    /// Row-major `dim × dim` matrices.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elements: Option<Vec<Vec<f64>>>,
}

impl From<&GroupReport> for GroupJson {
    fn from(g: &GroupReport) -> Self {
        let listed = g.has_elements() && g.order.is_some_and(|o| o <= MAX_LISTED_ORDER);
        GroupJson {
            dim: g.dim,
            verdict: g.verdict.as_str().into(),
            order: g.order,
            order_log10: g.order_log10,
            classification: g.classification.as_str().into(),
            blocks: g.blocks.as_ref().map(|bs| bs.iter().map(BlockJson::from).collect()),
            angles: g
                .angles
                .iter()
                .map(|a| AngleJson {
                    i: a.i + 1,
                    j: a.j + 1,
                    cos: a.cos,
                    q: a.q,
                    rational: a.rational.map(|(p, d)| [p, d]),
                })
                .collect(),
            generators: g.generators.clone(),
            offending_pair: g.offending_pair.map(|(i, j)| [i + 1, j + 1]),
            elements: listed.then(|| g.elements.clone()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProxJson {
    pub penalty: String,
    pub n: usize,
    pub lambda: Vec<f64>,
    pub method: String,
    pub u: Vec<f64>,
    pub sweeps: Option<usize>,
    pub converged: bool,
    pub kkt_residual: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn penalty_json_accepts_scalar_and_list_lambda() {
        let p = parse_penalty_json(r#"{"kind":"fused-chain","n":4,"lambda":0.5}"#).unwrap();
        assert_eq!(p.to_spec(None).unwrap(), PenaltySpec::new(PenaltyKind::FusedGraph, 4, 0.5));
        let p = parse_penalty_json(r#"{"kind":"sparse-fused","lambda":[1,2],"edges":[[1,2],[2,3]]}"#).unwrap();
        let s = p.to_spec(Some(3)).unwrap();
        assert_eq!(s.lambda, vec![1.0, 2.0]);
        assert_eq!(s.edges, Some(vec![(1, 2), (2, 3)]));
        assert!(parse_penalty_json(r#"{"kind":"lasso","bogus":1}"#).is_err());
        assert!(parse_penalty_json(r#"{"kind":"lasso"}"#).unwrap().to_spec(None).is_err());
    }

    #[test]
    fn penalty_json_round_trips() {
        let spec = PenaltySpec::new(PenaltyKind::FusedGraph, 3, 0.25).with_edges(vec![(1, 3), (2, 3)]);
        let text = serde_json::to_string(&PenaltyFile::from_spec(&spec)).unwrap();
        assert_eq!(parse_penalty_json(&text).unwrap().to_spec(None).unwrap(), spec);
    }

    #[test]
    fn signal_csv() {
        assert_eq!(parse_signal("1\n -2.5 \n# note\n3e1\n".as_bytes()).unwrap(), vec![1.0, -2.5, 30.0]);
        assert!(parse_signal("1,2\n".as_bytes()).is_err());
        assert!(parse_signal("abc\n".as_bytes()).is_err());
        assert!(parse_signal("".as_bytes()).is_err());
        assert!(parse_signal("nan\n".as_bytes()).is_err());
    }

    #[test]
    fn edge_csv() {
        assert_eq!(parse_edges("1,2\n2, 3\n".as_bytes()).unwrap(), vec![(1, 2), (2, 3)]);
        assert!(parse_edges("0,1\n".as_bytes()).is_err());
        assert!(parse_edges("1\n".as_bytes()).is_err());
    }

    #[test]
    fn trace_csv_has_header_and_one_based_j() {
        let mut w = TraceWriter::new(Vec::new()).unwrap();
        w.write(&TraceRecord { sweep: 1, j: 0, alpha_old: 0.0, alpha_new: 1.0, c: 0.5, norm_y: 2.0 })
            .unwrap();
        let text = String::from_utf8(w.finish().unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("sweep,j,alpha_old,alpha_new,c,norm_y"));
        assert!(lines.next().unwrap().starts_with("1,1,"));
    }
}
