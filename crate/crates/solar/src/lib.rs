//! File formats, command-line front end and verification suite for
//! solar-penalized estimation. The numerical work lives in `solar-core`,
//! re-exported here as [`core`].

pub mod cli;
pub mod formats;
pub mod json;
pub mod schema;
pub mod verify;

pub use solar_core as core;
