use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the core routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("a solar base needs at least one base vector")]
    EmptyBase,
    #[error("base vector {0} is zero")]
    ZeroBaseVector(usize),
    #[error("bases and intervals differ in length ({bases} vs {intervals})")]
    LengthMismatch { bases: usize, intervals: usize },
    #[error("graph penalty has an empty edge set")]
    EmptyEdgeSet,
    #[error("edge ({0}, {1}) is out of range or a self-loop")]
    InvalidEdge(usize, usize),
    #[error("row {0} of the penalty matrix is zero")]
    ZeroRow(usize),
    #[error("invalid penalty spec: {0}")]
    InvalidSpec(String),
    #[error("operation requires a finite group")]
    NonFiniteGroup,
    #[error("orbit has {size} points, above the limit {limit}")]
    OrbitTooLarge { size: usize, limit: usize },
    #[error("u lies on or outside the mean domain at coordinates {0:?}")]
    BoundarySolution(Vec<usize>),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
