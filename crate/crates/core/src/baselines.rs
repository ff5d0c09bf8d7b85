//! Committed regression baselines and the fixed configurations that produce
//! them. A run passes when every measured value stays within its factor of
//! the committed number.

use serde::{Deserialize, Serialize};

use crate::carleman::{ratio_sweep, EstimateKind, SweepConfig};
use crate::conformal::{build_map_with, certify_with, BoundaryGraph};
use crate::doubling::{
    caccioppoli_scan, doubling_ratio, interpolation_scan, lemma_terms_audit, reference_solution, reverse_holder_scan,
    LemmaParams,
};
use crate::error::{Error, Result};
use crate::exec::Execution;

pub const CARLEMAN_FACTOR: f64 = 1.1;
pub const DOUBLING_FACTOR: f64 = 1.1;
pub const SCAN_FACTOR: f64 = 1.2;

const COMMITTED: &str = include_str!("../baselines/baselines.json");

pub const SWEEP_SEED: u64 = 20_240_611;
pub const REFERENCE_HALF_WIDTH: f64 = 0.5;
pub const REFERENCE_H: f64 = 1.0 / 256.0;
pub const SCAN_RADII: [f64; 3] = [0.25, 0.125, 0.0625];
pub const INTERPOLATION_EPS: [f64; 4] = [1.0, 0.5, 0.25, 0.1];
pub const REVERSE_HOLDER_Q: f64 = 4.0;

/// Seeded family of 20 shapes over `τ ∈ {4, 8, 16, 32}`, `r ∈ {0.05, 0.1, 0.2}`.
pub fn standard_sweep(kind: EstimateKind) -> SweepConfig {
    SweepConfig {
        kind,
        seed: SWEEP_SEED,
        family_size: 20,
        tau_grid: vec![4.0, 8.0, 16.0, 32.0],
        r_grid: vec![0.05, 0.1, 0.2],
        ht: 0.004,
        ntheta: 64,
    }
}

pub fn standard_lemma_params() -> LemmaParams {
    LemmaParams { r: 0.05, big_r: 0.15, r0_bar: 0.4, taus: (4..=20).map(f64::from).collect() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolationBaseline {
    pub m: usize,
    pub j: usize,
    pub max_c_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baselines {
    pub carleman_bilaplacian_max_q: f64,
    pub carleman_laplace_max_q: f64,
    /// `max D / min D − 1` over [`SCAN_RADII`] for the reference solution.
    pub doubling_variation: f64,
    pub lemma_c_hat_max: f64,
    /// Largest `Ĉ_h` over [`SCAN_RADII`], `h = 1..=6`.
    pub caccioppoli_max: Vec<f64>,
    pub interpolation: Vec<InterpolationBaseline>,
    pub reverse_holder_max: f64,
    /// `max |Φ(y)|/|y| / min |Φ(y)|/|y|` for `g = 0.1x²` at `n = 64`.
    pub conformal_ratio_spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineCheck {
    pub id: String,
    pub value: f64,
    pub baseline: f64,
    pub factor: f64,
    pub pass: bool,
}

impl Baselines {
    pub fn committed() -> Result<Self> {
        serde_json::from_str(COMMITTED).map_err(|e| Error::Parse(format!("committed baselines: {e}")))
    }

    /// Recomputes every baselined quantity with the fixed configurations.
    pub fn measure(exec: Execution) -> Result<Self> {
        let sweep_max = |kind| -> Result<f64> {
            let cfg = standard_sweep(kind);
            Ok(ratio_sweep(&cfg.family(), &cfg, exec)?.max_q())
        };
        let u = reference_solution(REFERENCE_HALF_WIDTH, REFERENCE_H)?;
        let origin = (0.0, 0.0);
        let ratios = SCAN_RADII.iter().map(|r| doubling_ratio(&u, origin, *r)).collect::<Result<Vec<_>>>()?;
        let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let cac = caccioppoli_scan(&u, origin, &SCAN_RADII, 6, exec)?;
        let mut interpolation = Vec::new();
        for m in 2..=4 {
            for j in 1..m {
                let rows = interpolation_scan(&u, origin, SCAN_RADII[0], m, j, &INTERPOLATION_EPS)?;
                let max_c_hat = rows.iter().map(|r| r.c_hat).fold(0.0, f64::max);
                interpolation.push(InterpolationBaseline { m, j, max_c_hat });
            }
        }
        let rh = reverse_holder_scan(&u, 0.0, SCAN_RADII[0], REVERSE_HOLDER_Q)?;
        let map = build_map_with(&BoundaryGraph::quadratic(0.1, 1.0, 0.5)?, 64, exec)?;
        let cert = certify_with(&map, exec);
        Ok(Self {
            carleman_bilaplacian_max_q: sweep_max(EstimateKind::Bilaplacian)?,
            carleman_laplace_max_q: sweep_max(EstimateKind::Laplace { epsilon: 0.5 })?,
            doubling_variation: hi / lo - 1.0,
            lemma_c_hat_max: lemma_terms_audit(&u, &standard_lemma_params(), exec)?.c_hat_max,
            caccioppoli_max: (1..=6).map(|h| cac.max_for(h)).collect(),
            interpolation,
            reverse_holder_max: rh.iter().map(|r| r.ratio).fold(0.0, f64::max),
            conformal_ratio_spread: cert.ratio_max / cert.ratio_min,
        })
    }

    /// One check per quantity of `self` against `committed`.
    pub fn compare(&self, committed: &Baselines) -> Vec<BaselineCheck> {
        let mut out = Vec::new();
        let mut push = |id: String, value: f64, baseline: f64, factor: f64| {
            out.push(BaselineCheck { pass: value.is_finite() && value <= baseline * factor, id, value, baseline, factor });
        };
        push("carleman-bilaplacian-max-q".into(), self.carleman_bilaplacian_max_q, committed.carleman_bilaplacian_max_q, CARLEMAN_FACTOR);
        push("carleman-laplace-max-q".into(), self.carleman_laplace_max_q, committed.carleman_laplace_max_q, CARLEMAN_FACTOR);
        push("doubling-variation".into(), self.doubling_variation, committed.doubling_variation, DOUBLING_FACTOR);
        push("lemma-c-hat-max".into(), self.lemma_c_hat_max, committed.lemma_c_hat_max, SCAN_FACTOR);
        for (h, (v, b)) in self.caccioppoli_max.iter().zip(&committed.caccioppoli_max).enumerate() {
            push(format!("caccioppoli-order-{}", h + 1), *v, *b, SCAN_FACTOR);
        }
        for (v, b) in self.interpolation.iter().zip(&committed.interpolation) {
            push(format!("interpolation-m{}-j{}", v.m, v.j), v.max_c_hat, b.max_c_hat, SCAN_FACTOR);
        }
        push("reverse-holder-max".into(), self.reverse_holder_max, committed.reverse_holder_max, SCAN_FACTOR);
        push("conformal-ratio-spread".into(), self.conformal_ratio_spread, committed.conformal_ratio_spread, SCAN_FACTOR);
        out
    }
}
