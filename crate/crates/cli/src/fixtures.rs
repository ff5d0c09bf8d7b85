//! Test profiles shared by the identities experiment and the check registry.

use std::f64::consts::PI;

use platelab_core::carleman::{
    commutator_i1_check, conjugate_split, hardy_check, hardy_sample, ibp_identity_check, punctured_mask, CarlemanWeight,
    CylinderField, CylinderGrid, IbpIdentity,
};
use platelab_core::field::{GridSpec, ScalarField};
use platelab_core::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub fn bump(z: f64) -> f64 {
    if z.abs() < 1.0 { (-1.0 / (1.0 - z * z)).exp() } else { 0.0 }
}

/// `t ∈ [−4, 0]` with spacing `h` in both `t` and `θ`.
pub fn cylinder(h: f64) -> CylinderGrid {
    let n = (4.0 / h).round() as usize + 1;
    CylinderGrid::new(-((n - 1) as f64) * h, 0.0, n, (2.0 * PI / h).round() as usize).expect("cylinder grid")
}

pub fn chi(t: f64) -> f64 {
    bump((t + 2.0) / 1.2)
}

/// Polynomial bump supported in `0.2 < |x| < 0.9`.
pub fn annulus(x: f64, y: f64) -> f64 {
    let z = (x.hypot(y) - 0.55) / 0.35;
    if z.abs() < 1.0 { (1.0 - z * z).powi(8) * (1.0 + 0.3 * x) } else { 0.0 }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityLevel {
    pub n: usize,
    pub split_residual: f64,
    pub i1_gap: f64,
    /// identity1 (ζ=1), identity2 (ζ=ρ⁻³), identity3 (ζ=x), identity3 (ζ=ρ⁻³)
    pub ibp_gaps: [f64; 4],
}

pub fn identity_level(n: usize) -> Result<IdentityLevel> {
    let w = CarlemanWeight::main();
    let cyl = cylinder(2.0 * PI / n as f64);
    let split_residual = conjugate_split(&CylinderField::from_fn(&cyl, |t, th| chi(t) * (1.0 + th.sin())), 3.0, &w)?.residual;
    let i1_gap = commutator_i1_check(&CylinderField::from_fn(&cyl, |t, th| chi(t) * th.sin()), 2.0, &w)?.relative_gap;
    let g = GridSpec::with_spacing((-1.0, 1.0), (-1.0, 1.0), 1.0 / n as f64)?;
    let u = ScalarField::from_fn(&g, annulus);
    let one = ScalarField::constant(&g, 1.0);
    let x1 = ScalarField::from_fn(&g, |x, _| x);
    let singular = ScalarField::from_fn(&g, |x, y| w.rho(x, y).map(|r| r.powi(-3)).unwrap_or(0.0))
        .with_mask(punctured_mask(&g, 0.1))?;
    let ibp_gaps = [
        ibp_identity_check(&one, &u, IbpIdentity::First)?.relative_gap,
        ibp_identity_check(&singular, &u, IbpIdentity::Second)?.relative_gap,
        ibp_identity_check(&x1, &u, IbpIdentity::Third)?.relative_gap,
        ibp_identity_check(&singular, &u, IbpIdentity::Third)?.relative_gap,
    ];
    Ok(IdentityLevel { n, split_residual, i1_gap, ibp_gaps })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HardySummary {
    pub profiles: usize,
    pub max_constant: f64,
    pub closed_form_lhs: f64,
    pub closed_form_rhs: f64,
}

/// Random sine-series profiles on `[0, S]`, `S ∈ [1, 10]`, plus `s e^{−s}`.
pub fn hardy_summary(seed: u64, profiles: usize) -> Result<HardySummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_constant = 0.0_f64;
    for _ in 0..profiles {
        let s_max = rng.random_range(1.0..10.0);
        let modes: Vec<(f64, f64)> =
            (1..=rng.random_range(1..6)).map(|k| (k as f64, rng.random_range(-1.0..1.0))).collect();
        let f = hardy_sample(|s| modes.iter().map(|(k, c)| c * (k * PI * s / s_max).sin()).sum(), s_max, 4001);
        max_constant = max_constant.max(hardy_check(&f, s_max)?.constant);
    }
    let c = hardy_check(&hardy_sample(|s| s * (-s).exp(), 40.0, 40_001), 40.0)?;
    Ok(HardySummary { profiles, max_constant, closed_form_lhs: c.lhs, closed_form_rhs: c.rhs })
}

pub fn order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}
