use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::NeumaierSum;

/// Slack allowed over the sharp constant 4 for discretization error.
pub const HARDY_SLACK: f64 = 5e-2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardyCheck {
    /// `∫ f²/s²`
    pub lhs: f64,
    /// `4 ∫ f′²`
    pub rhs: f64,
    /// `∫ f²/s² / ∫ f′²`, at most 4 for admissible `f`.
    pub constant: f64,
    pub pass: bool,
}

/// Hardy's inequality for samples `f[k] = f(k·S/(n−1))` on `[0, S]`.
///
/// The left side uses the trapezoid rule with the `s = 0` integrand replaced
/// by its limit `f′(0)²` (second-order one-sided difference); the right side
/// integrates squared cell differences, which is exact for piecewise linear
/// profiles with kinks on nodes.
pub fn hardy_check(f: &[f64], s_max: f64) -> Result<HardyCheck> {
    let n = f.len();
    if n < 3 || !(s_max > 0.0) {
        return Err(Error::usage("hardy check needs at least 3 samples on a positive interval"));
    }
    if f[0] != 0.0 {
        return Err(Error::HardyPrecondition { value: f[0] });
    }
    let h = s_max / (n - 1) as f64;
    let d0 = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    let mut lhs = NeumaierSum::default();
    lhs.add(0.5 * h * d0 * d0);
    for (k, v) in f.iter().enumerate().skip(1) {
        let s = k as f64 * h;
        let w = if k + 1 == n { 0.5 * h } else { h };
        lhs.add(w * v * v / (s * s));
    }
    let grad: f64 = f.windows(2).map(|p| (p[1] - p[0]).powi(2) / h).collect::<NeumaierSum>().total();
    let lhs = lhs.total();
    let rhs = 4.0 * grad;
    let constant = if grad > 0.0 { lhs / grad } else { 0.0 };
    Ok(HardyCheck { lhs, rhs, constant, pass: lhs <= rhs * (1.0 + HARDY_SLACK) })
}

/// Samples `f` on `n` equispaced nodes of `[0, s_max]`.
pub fn sample(f: impl Fn(f64) -> f64, s_max: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| f(s_max * k as f64 / (n - 1) as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let c = hardy_check(&sample(|s| s * (-s).exp(), 40.0, 40_001), 40.0).unwrap();
        assert!((c.lhs - 0.5).abs() < 5e-3 && (c.rhs - 1.0).abs() < 1e-2, "{c:?}");
        assert!(c.pass);
        let z = hardy_check(&[0.0; 10], 1.0).unwrap();
        assert_eq!((z.lhs, z.rhs, z.pass), (0.0, 0.0, true));
        let hat = hardy_check(&sample(|s| s.min(2.0 - s).max(0.0), 4.0, 4001), 4.0).unwrap();
        assert!((hat.lhs - (4.0 - 4.0 * 2f64.ln())).abs() < 1e-4, "{hat:?}");
        assert!((hat.rhs - 8.0).abs() < 1e-9);
        assert!(hat.lhs / hat.rhs < 1.0);
    }

    #[test]
    fn rejects_nonzero_origin() {
        assert_eq!(hardy_check(&[1.0, 1.0, 1.0], 1.0).unwrap_err().id(), "hardy-precondition");
    }
}
