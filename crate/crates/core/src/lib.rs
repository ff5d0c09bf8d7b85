//! Numerical laboratory for the boundary behaviour of Kirchhoff-Love plate
//! solutions: plate operators, a clamped-plate solver, the reflection extension
//! across a flat boundary, Carleman-weight functionals, a numerical conformal
//! flattening and doubling-ratio scans.

// `!(x > 0.0)` is how NaN gets rejected alongside non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod carleman;
pub mod conformal;
pub mod doubling;
pub mod error;
pub mod exec;
pub mod expr;
pub mod field;
pub mod plate;
pub mod poly;
pub mod reflection;
pub mod report;
pub mod solver;
pub use error::{Error, Result};
pub use exec::Execution;
