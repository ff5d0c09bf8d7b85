//! Carleman weights, log-polar cylinder fields, Hardy's inequality, the
//! exact identities of the conjugated Laplacian, and evaluators for both
//! sides of the Carleman estimates for `Δ` and `Δ²`.

mod cylinder;
mod estimates;
mod hardy;
mod identities;
mod sweep;
mod weight;

pub use cylinder::{CylinderField, CylinderGrid, RowDensity};
pub use estimates::{
    bilap_lhs_rhs, bilap_steps, laplace_lhs_rhs, AnnularTestFunction, BilapSteps, DerivativeProfile, EstimateTerms,
    TestShape, TAU_BAR,
};
pub use hardy::{hardy_check, sample as hardy_sample, HardyCheck, HARDY_SLACK};
pub use identities::{
    commutator_i1_check, conjugate_split, ibp_identity_check, punctured_mask, ConjugateSplit, IbpIdentity,
    IdentityCheck, IBP_MARGIN, SUPPORT_MARGIN,
};
pub use sweep::{ratio_sweep, EstimateKind, SweepConfig, SweepMax, SweepReport, SweepRow};
pub use weight::CarlemanWeight;
