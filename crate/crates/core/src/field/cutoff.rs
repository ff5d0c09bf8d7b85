use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Degree-9 smoothstep `S(s) = s⁵(126 − 420s + 540s² − 315s³ + 70s⁴)`:
/// `S(0) = 0`, `S(1) = 1`, derivatives of order 1..4 vanish at both ends.
const SMOOTHSTEP: [f64; 10] = [0.0, 0.0, 0.0, 0.0, 0.0, 126.0, -420.0, 540.0, -315.0, 70.0];

/// Highest derivative order with a recorded bound.
pub const MAX_ORDER: usize = 4;

fn poly_derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, a)| k as f64 * a).collect()
}

fn poly_eval(c: &[f64], s: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * s + a)
}

fn smoothstep_derivative(k: usize) -> Vec<f64> {
    (0..k).fold(SMOOTHSTEP.to_vec(), |c, _| poly_derivative(&c))
}

/// `max_{[0,1]} |p|`: endpoints plus every root of `p'`, located by sign
/// changes on a fine sample and polished by bisection.
fn max_abs_on_unit(p: &[f64]) -> f64 {
    let dp = poly_derivative(p);
    let n = 4096;
    let mut best = poly_eval(p, 0.0).abs().max(poly_eval(p, 1.0).abs());
    let mut prev = poly_eval(&dp, 0.0);
    for q in 1..=n {
        let s = q as f64 / n as f64;
        let cur = poly_eval(&dp, s);
        if prev == 0.0 {
            best = best.max(poly_eval(p, s - 1.0 / n as f64).abs());
        }
        if prev * cur < 0.0 {
            let (mut a, mut b) = (s - 1.0 / n as f64, s);
            let fa = prev;
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if poly_eval(&dp, m) * fa > 0.0 {
                    a = m;
                } else {
                    b = m;
                }
            }
            best = best.max(poly_eval(p, 0.5 * (a + b)).abs());
        }
        prev = cur;
    }
    best
}

/// Radial cutoff: zero on `(0, r/4) ∪ (2R0/3, ∞)`, one on `[r/2, R0/2]`,
/// smoothstep ramps in between. Bounds satisfy
/// `|η^(k)| ≤ inner_bounds[k]·r^(-k)` on the inner ramp and
/// `|η^(k)| ≤ outer_bounds[k]·R0^(-k)` on the outer ramp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnularCutoff {
    pub r: f64,
    pub outer: f64,
    pub inner_bounds: [f64; MAX_ORDER + 1],
    pub outer_bounds: [f64; MAX_ORDER + 1],
    /// Single constant dominating every entry of both bound tables.
    pub constant: f64,
}

pub fn build_cutoff(r: f64, outer: f64) -> Result<AnnularCutoff> {
    if !(r > 0.0 && r < outer / 2.0 && outer < 1.0) {
        return Err(Error::CutoffScaleOrder { r, outer });
    }
    let mut inner_bounds = [0.0; MAX_ORDER + 1];
    let mut outer_bounds = [0.0; MAX_ORDER + 1];
    for k in 0..=MAX_ORDER {
        let m = max_abs_on_unit(&smoothstep_derivative(k));
        // inner ramp has width r/4, outer ramp R0/6
        inner_bounds[k] = m * 4f64.powi(k as i32);
        outer_bounds[k] = m * 6f64.powi(k as i32);
    }
    let constant = inner_bounds.iter().chain(&outer_bounds).fold(0.0_f64, |a, &b| a.max(b));
    Ok(AnnularCutoff { r, outer, inner_bounds, outer_bounds, constant })
}

impl AnnularCutoff {
    pub fn eta(&self, t: f64) -> f64 {
        self.derivative(t, 0)
    }

    /// `d^k η / dt^k` for `k ≤ 4`.
    pub fn derivative(&self, t: f64, k: usize) -> f64 {
        assert!(k <= MAX_ORDER);
        let (a, b) = (self.r / 4.0, self.r / 2.0);
        let (c, d) = (self.outer / 2.0, 2.0 * self.outer / 3.0);
        let ds = smoothstep_derivative(k);
        if t <= a || t >= d {
            0.0
        } else if t < b {
            let w = b - a;
            let v = poly_eval(&ds, (t - a) / w) / w.powi(k as i32);
            if k == 0 { v.clamp(0.0, 1.0) } else { v }
        } else if t <= c {
            if k == 0 { 1.0 } else { 0.0 }
        } else {
            let w = d - c;
            let v = poly_eval(&ds, (t - c) / w) / w.powi(k as i32);
            // Horner cancels near the ramp ends; keep η inside [0, 1]
            if k == 0 { (1.0 - v).clamp(0.0, 1.0) } else { -v }
        }
    }

    /// Inner edge of the support.
    pub fn support_inner(&self) -> f64 {
        self.r / 4.0
    }

    /// Outer edge of the support.
    pub fn support_outer(&self) -> f64 {
        2.0 * self.outer / 3.0
    }
}
