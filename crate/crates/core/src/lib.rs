//! Solar-penalized estimation by the least-squares reduction.
//!
//! A solar penalty is the support function of a Minkowski sum of line
//! segments and rays. This crate represents such penalties by their base
//! representation, computes the penalized least-squares fit as the
//! minimum-norm element of the dual feasible set by cyclic coordinate
//! descent, identifies the reflection group generated by the base vectors,
//! and recovers the fit of any estimator with a group-invariant generator by
//! applying the conjugate-gradient map to the least-squares fit.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dual;
pub mod error;
pub mod expofam;
pub mod fast;
pub mod group;
pub mod linalg;
pub mod oracle;
pub mod penalty;

pub use dual::{
    coordinate_update, solve_min_norm, solve_min_norm_from, solve_min_norm_observed, DualState, MinNormFit, SolveOptions,
    SweepOrder, TraceRecord,
};
pub use error::{Error, Result};
pub use expofam::{
    check_invariance, fit, oracle_solve, reduce, FitError, FitOptions, FitReport, GeneratorFamily,
    InvarianceTag, Method, OracleOptions, OracleSolution,
};
pub use fast::{pava, soft_threshold, taut_string, tube_check};
pub use group::{
    generate_group, majorizes, orbit, Block, Certificate, Classification, GroupReport,
    MajorizationVerdict, Reflection, Verdict,
};
pub use oracle::{gminimal_sample_check, simplex_least_squares, SimplexLSProblem, SimplexLSSolution};
pub use penalty::{build_penalty, sum_penalties, ExtInterval, PenaltyKind, PenaltySpec, SolarBase};
