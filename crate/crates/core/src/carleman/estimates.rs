//! Both sides of the weighted estimates for `Δ` and `Δ²` on test functions
//! supported in an annulus, evaluated on the log-polar cylinder.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cylinder::{CylinderField, CylinderGrid, RowDensity};
use super::identities::SUPPORT_MARGIN;
use super::weight::CarlemanWeight;
use crate::error::{Error, Result};
use crate::field::{build_cutoff, AnnularCutoff, GridSpec, LogValue, ScalarField};

/// Angular factor `1 + Σ (a_m cos mθ + b_m sin mθ)` and outer scale of a
/// test function, independent of the inner scale `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestShape {
    pub id: String,
    pub outer: f64,
    pub amplitude: f64,
    /// `(m, a_m, b_m)`
    pub modes: Vec<(u32, f64, f64)>,
}

impl TestShape {
    pub fn bump(id: impl Into<String>, outer: f64) -> Self {
        Self { id: id.into(), outer, amplitude: 1.0, modes: Vec::new() }
    }

    pub fn zero(id: impl Into<String>) -> Self {
        Self { id: id.into(), outer: 0.9, amplitude: 0.0, modes: Vec::new() }
    }

    /// Outer scale in `[0.6, 0.95]`, up to three angular modes with
    /// coefficients in `[−1/2, 1/2]/m`.
    pub fn random<R: Rng>(id: impl Into<String>, rng: &mut R) -> Self {
        let outer = rng.random_range(0.6..0.95);
        let n = rng.random_range(0..=3u32);
        let modes = (1..=n)
            .map(|m| {
                let s = 0.5 / m as f64;
                (m, rng.random_range(-s..s), rng.random_range(-s..s))
            })
            .collect();
        Self { id: id.into(), outer, amplitude: 1.0, modes }
    }

    pub fn angular(&self, theta: f64) -> f64 {
        self.amplitude
            * (1.0 + self.modes.iter().map(|&(m, a, b)| a * (m as f64 * theta).cos() + b * (m as f64 * theta).sin()).sum::<f64>())
    }

    pub fn at_scale(&self, r: f64) -> Result<AnnularTestFunction> {
        Ok(AnnularTestFunction { shape: self.clone(), cutoff: build_cutoff(r, self.outer)? })
    }
}

/// `U(x) = η(|x|)·Θ(θ)` with the annular cutoff `η` at scales `(r, R₀)`;
/// supported in `r/4 ≤ |x| ≤ 2R₀/3`.
#[derive(Debug, Clone)]
pub struct AnnularTestFunction {
    pub shape: TestShape,
    pub cutoff: AnnularCutoff,
}

impl AnnularTestFunction {
    pub fn r(&self) -> f64 {
        self.cutoff.r
    }

    pub fn eval_polar(&self, s: f64, theta: f64) -> f64 {
        self.cutoff.eta(s) * self.shape.angular(theta)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.eval_polar(x.hypot(y), y.atan2(x))
    }

    pub fn to_disc_field(&self, grid: &GridSpec) -> ScalarField {
        ScalarField::from_fn(grid, |x, y| self.eval(x, y))
    }

    pub fn to_cylinder(&self, grid: &CylinderGrid) -> CylinderField {
        CylinderField::from_fn(grid, |t, th| self.eval_polar(t.exp(), th))
    }

    /// Cylinder grid `[log(r/8), 0]` for this function.
    pub fn cylinder_grid(&self, ht: f64, ntheta: usize) -> Result<CylinderGrid> {
        CylinderGrid::for_scale(self.r(), ht, ntheta)
    }
}

/// θ-integrated squared derivative densities of one field.
#[derive(Debug, Clone)]
pub struct DerivativeProfile {
    pub u2: RowDensity,
    pub grad2: RowDensity,
    pub hess2: RowDensity,
    pub third2: RowDensity,
    pub lap2: RowDensity,
    pub bilap2: RowDensity,
}

impl DerivativeProfile {
    pub fn new(u: &CylinderField) -> Result<Self> {
        u.check_support(SUPPORT_MARGIN)?;
        let sq = |f: &CylinderField| RowDensity::new(&f.map(|v| v * v));
        let (ux, uy) = (u.dx(), u.dy());
        let (uxx, uxy, uyy) = (ux.dx(), ux.dy(), uy.dy());
        let (uxxx, uxxy, uxyy, uyyy) = (uxx.dx(), uxx.dy(), uxy.dy(), uyy.dy());
        let lap = u.laplacian();
        let bilap = lap.laplacian();
        Ok(Self {
            u2: sq(u)?,
            grad2: RowDensity::new(&ux.zip_with(&uy, |a, b| a * a + b * b))?,
            hess2: RowDensity::new(&CylinderField::from_index_fn(u.grid(), |i, k| {
                uxx.at(i, k).powi(2) + 2.0 * uxy.at(i, k).powi(2) + uyy.at(i, k).powi(2)
            }))?,
            third2: RowDensity::new(&CylinderField::from_index_fn(u.grid(), |i, k| {
                uxxx.at(i, k).powi(2) + 3.0 * uxxy.at(i, k).powi(2) + 3.0 * uxyy.at(i, k).powi(2) + uyyy.at(i, k).powi(2)
            }))?,
            lap2: sq(&lap)?,
            bilap2: sq(&bilap)?,
        })
    }
}

/// `∫ρ^{p−2τ} g dx` with `dx = e^{2t} dt dθ` and `log ρ = φ(t)`.
fn weighted(d: &RowDensity, w: &CarlemanWeight, p: f64, tau: f64) -> LogValue {
    d.weighted(|t| (p - 2.0 * tau) * w.phi_t(t) + 2.0 * t)
}

fn ratio(num: LogValue, den: LogValue) -> Result<f64> {
    match (num.is_zero(), den.is_zero()) {
        (true, _) => Ok(0.0),
        (false, true) => Err(Error::RhsUnderflow),
        _ => Ok(num.div(den).to_f64()),
    }
}

/// LHS terms, RHS and `Q = Σ lhs / rhs` of one estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateTerms {
    pub tau: f64,
    pub lhs: Vec<LogValue>,
    pub rhs: LogValue,
    pub q: f64,
}

impl EstimateTerms {
    fn new(tau: f64, lhs: Vec<LogValue>, rhs: LogValue) -> Result<Self> {
        let q = ratio(LogValue::sum(lhs.iter().copied()), rhs)?;
        Ok(Self { tau, lhs, rhs, q })
    }

    /// Share of each LHS term in the LHS total.
    pub fn shares(&self) -> Vec<f64> {
        let total = LogValue::sum(self.lhs.iter().copied());
        self.lhs.iter().map(|v| if total.is_zero() { 0.0 } else { v.div(total).to_f64() }).collect()
    }
}

/// `τ²r∫ρ^{−1−2τ}u² + τ³∫ρ^{ε−2τ}u² + τ∫ρ^{2+ε−2τ}|∇u|²` against
/// `∫ρ^{4−2τ}|Δu|²`.
pub fn laplace_lhs_rhs(p: &DerivativeProfile, tau: f64, r: f64, w: &CarlemanWeight) -> Result<EstimateTerms> {
    check_tau(tau, 1.0)?;
    let eps = w.epsilon();
    let lhs = vec![
        weighted(&p.u2, w, -1.0, tau).scale(tau * tau * r),
        weighted(&p.u2, w, eps, tau).scale(tau.powi(3)),
        weighted(&p.grad2, w, 2.0 + eps, tau).scale(tau),
    ];
    EstimateTerms::new(tau, lhs, weighted(&p.lap2, w, 4.0, tau))
}

/// Lower bound on τ for the bilaplacian estimate.
pub const TAU_BAR: f64 = 3.0;

/// `τ⁴r²∫ρ^{−2−2τ}U² + Σ_{k≤3} τ^{6−2k}∫ρ^{2k+1−2τ}|D^kU|²` against
/// `∫ρ^{8−2τ}(Δ²U)²`, with `ε = 1/2`.
pub fn bilap_lhs_rhs(p: &DerivativeProfile, tau: f64, r: f64) -> Result<EstimateTerms> {
    check_tau(tau, TAU_BAR)?;
    let w = CarlemanWeight::main();
    let lhs = vec![
        weighted(&p.u2, &w, -2.0, tau).scale(tau.powi(4) * r * r),
        weighted(&p.u2, &w, 1.0, tau).scale(tau.powi(6)),
        weighted(&p.grad2, &w, 3.0, tau).scale(tau.powi(4)),
        weighted(&p.hess2, &w, 5.0, tau).scale(tau.powi(2)),
        weighted(&p.third2, &w, 7.0, tau),
    ];
    EstimateTerms::new(tau, lhs, weighted(&p.bilap2, &w, 8.0, tau))
}

/// Ratios of the intermediate inequalities used to pass from `Δ` to `Δ²`
/// (applying the `Δ` estimate to `ΔU`, then to `U` at shifted τ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BilapSteps {
    /// `τ²r∫ρ^{3−2τ}|ΔU|² / ∫ρ^{8−2τ}|Δ²U|²`
    pub lap_of_lap_inner: f64,
    /// `τ⁴r²∫ρ^{−2−2τ}U² / τ²r∫ρ^{3−2τ}|ΔU|²`
    pub inner_to_u: f64,
    /// `τ³∫ρ^{4+ε−2τ}|ΔU|² / ∫ρ^{8−2τ}|Δ²U|²`
    pub lap_of_lap_bulk: f64,
    /// `(τ⁶∫ρ^{2ε−2τ}U² + τ⁴∫ρ^{2+2ε−2τ}|∇U|²) / τ³∫ρ^{4+ε−2τ}|ΔU|²`
    pub bulk_to_u: f64,
}

impl BilapSteps {
    pub fn max(&self) -> f64 {
        self.lap_of_lap_inner.max(self.inner_to_u).max(self.lap_of_lap_bulk).max(self.bulk_to_u)
    }
}

pub fn bilap_steps(p: &DerivativeProfile, tau: f64, r: f64) -> Result<BilapSteps> {
    check_tau(tau, TAU_BAR)?;
    let w = CarlemanWeight::main();
    let eps = w.epsilon();
    let rhs = weighted(&p.bilap2, &w, 8.0, tau);
    let inner = weighted(&p.lap2, &w, 3.0, tau).scale(tau * tau * r);
    let bulk = weighted(&p.lap2, &w, 4.0 + eps, tau).scale(tau.powi(3));
    let u_inner = weighted(&p.u2, &w, -2.0, tau).scale(tau.powi(4) * r * r);
    let u_bulk = weighted(&p.u2, &w, 2.0 * eps, tau)
        .scale(tau.powi(6))
        .add(weighted(&p.grad2, &w, 2.0 + 2.0 * eps, tau).scale(tau.powi(4)));
    Ok(BilapSteps {
        lap_of_lap_inner: ratio(inner, rhs)?,
        inner_to_u: ratio(u_inner, inner)?,
        lap_of_lap_bulk: ratio(bulk, rhs)?,
        bulk_to_u: ratio(u_bulk, bulk)?,
    })
}

fn check_tau(tau: f64, min: f64) -> Result<()> {
    if !(tau >= min) || tau > 40.0 {
        return Err(Error::usage(format!("tau must lie in [{min}, 40], got {tau}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(shape: &TestShape, r: f64, ht: f64) -> DerivativeProfile {
        let u = shape.at_scale(r).unwrap();
        let g = u.cylinder_grid(ht, 32).unwrap();
        DerivativeProfile::new(&u.to_cylinder(&g)).unwrap()
    }

    #[test]
    fn zero_function_gives_zero() {
        let p = profile(&TestShape::zero("z"), 0.2, 0.01);
        let t = bilap_lhs_rhs(&p, 6.0, 0.2).unwrap();
        assert_eq!(t.q, 0.0);
        assert!(t.lhs.iter().all(|v| v.is_zero()) && t.rhs.is_zero());
        assert_eq!(laplace_lhs_rhs(&p, 6.0, 0.2, &CarlemanWeight::main()).unwrap().q, 0.0);
    }

    #[test]
    fn homogeneous_in_amplitude() {
        let mut s = TestShape::bump("b", 0.8);
        s.modes.push((1, 0.0, 0.5));
        let p1 = profile(&s, 0.2, 0.01);
        s.amplitude = 10.0;
        let p10 = profile(&s, 0.2, 0.01);
        for tau in [3.0, 12.0, 24.0] {
            let (a, b) = (bilap_lhs_rhs(&p1, tau, 0.2).unwrap().q, bilap_lhs_rhs(&p10, tau, 0.2).unwrap().q);
            assert!((a - b).abs() <= 1e-10 * a, "{a} {b}");
            let w = CarlemanWeight::main();
            let (a, b) = (laplace_lhs_rhs(&p1, tau, 0.2, &w).unwrap().q, laplace_lhs_rhs(&p10, tau, 0.2, &w).unwrap().q);
            assert!((a - b).abs() <= 1e-10 * a);
        }
    }

    #[test]
    fn rejects_functions_reaching_the_grid_ends() {
        let g = CylinderGrid::for_scale(0.1, 0.01, 16).unwrap();
        let u = CylinderField::from_fn(&g, |t, _| (2.0 * t).exp());
        assert_eq!(DerivativeProfile::new(&u).unwrap_err().id(), "support-truncation");
    }

    #[test]
    fn tau_range_enforced() {
        let p = profile(&TestShape::bump("b", 0.8), 0.2, 0.02);
        assert!(bilap_lhs_rhs(&p, 2.0, 0.2).is_err());
        assert!(bilap_lhs_rhs(&p, 41.0, 0.2).is_err());
    }
}
