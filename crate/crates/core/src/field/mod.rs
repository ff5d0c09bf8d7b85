//! Uniform-grid fields, finite differences, masks, quadrature and the
//! annular cutoff.

mod cutoff;
mod derive;
pub mod io;
mod grid;
mod logvalue;
mod mask;
mod quadrature;
mod scalar;
pub mod stencil;

pub use cutoff::{build_cutoff, AnnularCutoff};
pub use derive::{all_of_order, bilaplacian, derive, derive_with, gradient, laplacian, tensor_norm_sq};
pub use grid::GridSpec;
pub use logvalue::{LogValue, NeumaierSum};
pub use mask::Mask;
pub use quadrature::{
    integrate, weighted_integrate_log, weighted_integrate_log_sq, Half, QuadratureWeights, Region,
};
pub use scalar::ScalarField;
pub use stencil::Accuracy;
