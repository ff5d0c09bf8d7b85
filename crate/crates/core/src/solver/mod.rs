//! Clamped plate boundary-value problems on a rectangle with a flat clamped
//! bottom edge.

mod bvp;
pub mod sparse;

pub use bvp::{
    apply_stencil, assemble, convergence_study, convergence_study_with, solve, solve_with, BoundaryData,
    ClampedBVP, ConvergenceRow, ManufacturedCase, SolveReport, SolverPath, SparseSystem,
};
pub use sparse::{BandedLu, Csr};
