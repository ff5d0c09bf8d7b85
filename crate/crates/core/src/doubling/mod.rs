//! Doubling ratios and frequency at a flat boundary point, the audit of the
//! three-ball lemma with the τ₀ chain, dyadic propagation, and the
//! Caccioppoli, interpolation and reverse-Hölder scans.

mod lemma;
mod reference;
mod scan;
mod scans;

pub use lemma::{
    doubling_chain, lemma_terms_audit, tau0_select, ChainReport, LemmaAudit, LemmaParams, LemmaRow, Masses,
    AUDIT_CLAMP_RTOL,
};
pub use reference::{reference_exact, reference_solution, REFERENCE_NU};
pub use scan::{
    doubling_ratio, doubling_scan, frequency, half_ball_mass, propagate, DoublingScan, Propagation, DEFAULT_C_ART,
    MIN_RADIUS_CELLS,
};
pub use scans::{
    caccioppoli_scan, high_derivative, interpolation_scan, jet_norm_sq, reverse_holder_ratio, reverse_holder_scan,
    third_derivative_trace, CaccioppoliRow, CaccioppoliScan, InterpolationRow, ReverseHolderRow,
    CACCIOPPOLI_MIN_CELLS, MAX_CACCIOPPOLI_ORDER,
};
