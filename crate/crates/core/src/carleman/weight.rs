use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{GridSpec, ScalarField};

/// The weight family `φ_ε(s) = s/(1+s^ε)^{1/ε}`, `ρ(x) = φ_ε(|x|)`, and its
/// log-polar profile `φ(t) = log φ_ε(e^t) = t − ε⁻¹log(1+e^{εt})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CarlemanWeight {
    epsilon: f64,
}

impl CarlemanWeight {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::usage(format!("weight exponent must lie in (0, 1), got {epsilon}")));
        }
        Ok(Self { epsilon })
    }

    /// `ε = 1/2`: `φ(s) = s/(1+√s)²`.
    pub fn main() -> Self {
        Self { epsilon: 0.5 }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn phi_s(&self, s: f64) -> f64 {
        s / (1.0 + s.powf(self.epsilon)).powf(1.0 / self.epsilon)
    }

    pub fn rho(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.log_rho(x, y)?.exp())
    }

    pub fn log_rho(&self, x: f64, y: f64) -> Result<f64> {
        let s = x.hypot(y);
        if s == 0.0 {
            return Err(Error::WeightSingularPoint);
        }
        Ok(self.phi_t(s.ln()))
    }

    /// `log ρ` on a grid; `−∞` at the origin so that weighted quadrature
    /// rejects test functions that do not vanish there.
    pub fn log_rho_field(&self, grid: &GridSpec) -> ScalarField {
        ScalarField::from_fn(grid, |x, y| self.log_rho(x, y).unwrap_or(f64::NEG_INFINITY))
    }

    /// `log(1+e^{εt})` without overflow.
    fn softplus(&self, t: f64) -> f64 {
        let z = self.epsilon * t;
        if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() }
    }

    pub fn phi_t(&self, t: f64) -> f64 {
        t - self.softplus(t) / self.epsilon
    }

    pub fn dphi(&self, t: f64) -> f64 {
        1.0 / (1.0 + (self.epsilon * t).exp())
    }

    pub fn ddphi(&self, t: f64) -> f64 {
        let e = (self.epsilon * t).exp();
        -self.epsilon * e / ((1.0 + e) * (1.0 + e))
    }

    /// `γ = 1/φ′ = 1 + e^{εt}`.
    pub fn gamma(&self, t: f64) -> f64 {
        1.0 + (self.epsilon * t).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        let w = CarlemanWeight::main();
        assert!((w.phi_s(1.0) - 0.25).abs() < 1e-15);
        assert!((w.phi_s(0.25) - 1.0 / 9.0).abs() < 1e-15);
        assert!((CarlemanWeight::new(0.999_999_999).unwrap().phi_s(1.0) - 0.5).abs() < 1e-8);
        assert!(CarlemanWeight::new(1.0).is_err());
        assert_eq!(w.rho(0.0, 0.0).unwrap_err().id(), "weight-singular-point");
    }

    #[test]
    fn main_weight_closed_form_and_bounds() {
        let w = CarlemanWeight::main();
        for k in 1..=1000 {
            let s = k as f64 / 1000.0;
            let v = w.phi_s(s);
            assert!((v - s / (1.0 + s.sqrt()).powi(2)).abs() <= 1e-14 * s.max(1e-3));
            assert!(v >= s / 4.0 && v <= s);
        }
    }

    #[test]
    fn log_profile_and_derivatives() {
        for eps in [0.25, 0.5, 0.9] {
            let w = CarlemanWeight::new(eps).unwrap();
            let h = 1e-3;
            for k in 1..60 {
                let t = -(k as f64) * 0.1;
                assert!((w.phi_s(t.exp()).ln() - w.phi_t(t)).abs() < 1e-12);
                let d = (w.phi_t(t + h) - w.phi_t(t - h)) / (2.0 * h);
                let dd = (w.phi_t(t + h) - 2.0 * w.phi_t(t) + w.phi_t(t - h)) / (h * h);
                assert!((d - w.dphi(t)).abs() < 1e-6);
                assert!((dd - w.ddphi(t)).abs() < 1e-5);
                assert!((w.gamma(t) * w.dphi(t) - 1.0).abs() < 1e-15);
            }
        }
    }
}
