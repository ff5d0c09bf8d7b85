use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::field::{integrate, Half, Region, ScalarField};

/// Ratio of the frequency radii `r0 / (r0 / C_art)` when no margin is
/// configured.
pub const DEFAULT_C_ART: f64 = 8.0;
/// Smallest scanned radius in grid cells.
pub const MIN_RADIUS_CELLS: f64 = 16.0;
/// Denominators at or below this are treated as zero.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;

/// `∫_{B_r(P) ∩ {y ≥ P_y}} v²` over `v`'s mask.
pub fn half_ball_mass(v: &ScalarField, center: (f64, f64), radius: f64) -> Result<f64> {
    let g = v.grid();
    let tol = 1e-9 * g.h;
    let fits = center.0 - radius >= g.x_min - tol
        && center.0 + radius <= g.x_max + tol
        && center.1 + radius <= g.y_max + tol
        && center.1 >= g.y_min - tol;
    if !(radius > 0.0) || !fits {
        return Err(Error::usage(format!(
            "half ball of radius {radius} at {center:?} does not fit the grid [{}, {}] x [{}, {}]",
            g.x_min, g.x_max, g.y_min, g.y_max
        )));
    }
    let w = Region::disc(center, radius, Half::Upper).weights(g);
    integrate(&v.mul(v)?, &w)
}

fn ratio(num: f64, den: f64, what: &str) -> Result<f64> {
    if !(den > UNDERFLOW_FLOOR) {
        return Err(Error::VanishingDenominator(format!("{what}: denominator {den:e}")));
    }
    Ok(num / den)
}

/// `D(r) = ∫_{B_2r} v² / ∫_{B_r} v²` on half balls centred at a boundary
/// point.
pub fn doubling_ratio(v: &ScalarField, center: (f64, f64), r: f64) -> Result<f64> {
    let num = half_ball_mass(v, center, 2.0 * r)?;
    let den = half_ball_mass(v, center, r)?;
    ratio(num, den, &format!("doubling ratio at r={r}"))
}

/// `N = ∫_{B_r0} v² / ∫_{B_{r0/C_art}} v²`.
pub fn frequency(v: &ScalarField, center: (f64, f64), r0: f64, c_art: f64) -> Result<f64> {
    if !(c_art > 1.0) {
        return Err(Error::usage(format!("scale margin must exceed 1, got {c_art}")));
    }
    let num = half_ball_mass(v, center, r0)?;
    let den = half_ball_mass(v, center, r0 / c_art)?;
    ratio(num, den, &format!("frequency at r0={r0}"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingScan {
    pub center: (f64, f64),
    pub r0: f64,
    pub c_art: f64,
    /// Strictly decreasing dyadic radii `r0 / (C_art 2^k)`, `k ≥ 1`.
    pub radii: Vec<f64>,
    pub ratios: Vec<f64>,
    pub frequency: f64,
    /// `log max D / log N`, the smallest `k` with `D(r) ≤ N^k` at unit
    /// constant; absent when `N ≤ 1`.
    pub k_hat: Option<f64>,
}

impl DoublingScan {
    /// `max D / min D − 1` over the scanned radii.
    pub fn variation(&self) -> f64 {
        let hi = self.ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = self.ratios.iter().copied().fold(f64::INFINITY, f64::min);
        hi / lo - 1.0
    }

    pub fn to_csv(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .radii
            .iter()
            .zip(&self.ratios)
            .map(|(r, d)| vec![crate::report::fmt_f64(*r), crate::report::fmt_f64(*d)])
            .collect();
        crate::report::csv_table(&["r", "doubling_ratio"], &rows)
    }
}

/// Dyadic scan down to `16h`.
pub fn doubling_scan(v: &ScalarField, center: (f64, f64), r0: f64, c_art: f64, exec: Execution) -> Result<DoublingScan> {
    let floor = MIN_RADIUS_CELLS * v.grid().h;
    let radii: Vec<f64> = (1..)
        .map(|k| r0 / (c_art * 2f64.powi(k)))
        .take_while(|r| *r >= floor * (1.0 - 1e-12))
        .collect();
    if radii.is_empty() {
        return Err(Error::usage(format!(
            "no dyadic radius below r0/C_art = {} reaches the floor {floor}",
            r0 / c_art
        )));
    }
    let frequency = frequency(v, center, r0, c_art)?;
    let ratios = exec.map(&radii, |r| doubling_ratio(v, center, *r)).into_iter().collect::<Result<Vec<_>>>()?;
    let peak = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let k_hat = (frequency > 1.0).then(|| peak.ln() / frequency.ln());
    Ok(DoublingScan { center, r0, c_art, radii, ratios, frequency, k_hat })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Propagation {
    /// `⌊log₂(s/r)⌋`
    pub j: u32,
    /// `C N̄³ (s/r)^{log₂(C N̄³)}`
    pub bound: f64,
}

pub fn propagate(doubling_const: f64, n_bar: f64, r: f64, s: f64) -> Result<Propagation> {
    if !(r > 0.0 && s > r) {
        return Err(Error::usage(format!("propagation needs 0 < r < s, got r={r}, s={s}")));
    }
    if !(doubling_const > 0.0 && n_bar > 0.0) {
        return Err(Error::usage("propagation constants must be positive"));
    }
    let k = doubling_const * n_bar.powi(3);
    let ratio = s / r;
    Ok(Propagation { j: ratio.log2().floor() as u32, bound: k * ratio.powf(k.log2()) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;

    fn grid(n: f64) -> GridSpec {
        GridSpec::with_spacing((-1.0, 1.0), (0.0, 1.0), 1.0 / n).unwrap()
    }

    #[test]
    fn homogeneous_scaling() {
        let g = grid(128.0);
        for (v, expect) in [
            (ScalarField::from_fn(&g, |_, y| y * y), 64.0),
            (ScalarField::from_fn(&g, |_, y| y * y * y), 256.0),
            (ScalarField::from_fn(&g, |x, y| x * y * y), 256.0),
        ] {
            for r in [0.125, 0.25, 0.5] {
                let d = doubling_ratio(&v, (0.0, 0.0), r).unwrap();
                assert!((d / expect - 1.0).abs() < 0.03, "{d} vs {expect} at r={r}");
            }
        }
    }

    #[test]
    fn frequency_cases() {
        let g = grid(128.0);
        let n = frequency(&ScalarField::from_fn(&g, |_, y| y * y), (0.0, 0.0), 1.0, 2.0).unwrap();
        assert!((n / 64.0 - 1.0).abs() < 0.03);
        let c = frequency(&ScalarField::constant(&g, 1.0), (0.0, 0.0), 1.0, 2.0).unwrap();
        assert!((c / 4.0 - 1.0).abs() < 0.05);
        let e = frequency(&ScalarField::zeros(&g), (0.0, 0.0), 1.0, 2.0).unwrap_err();
        assert_eq!(e.id(), "vanishing-denominator");
        assert_eq!(doubling_ratio(&ScalarField::zeros(&g), (0.0, 0.0), 0.25).unwrap_err().id(), "vanishing-denominator");
    }

    #[test]
    fn scan_radii_and_exponent() {
        let g = grid(128.0);
        let s = doubling_scan(&ScalarField::from_fn(&g, |_, y| y * y), (0.0, 0.0), 1.0, 2.0, Execution::Sequential).unwrap();
        assert_eq!(s.radii, vec![0.25, 0.125]);
        assert!(s.variation() < 0.03);
        // D = N for a degree-2 field when C_art = 2
        assert!((s.k_hat.unwrap() - 1.0).abs() < 0.02);
    }

    #[test]
    fn propagation_hand_cases() {
        let p = propagate(2.0, 1.0, 1.0, 4.0).unwrap();
        assert_eq!(p.j, 2);
        assert!((p.bound - 8.0).abs() < 1e-12);
        let q = propagate(3.0, 2.0, 1.0, 1.0 + 1e-9).unwrap();
        assert_eq!(q.j, 0);
        assert!((q.bound / 24.0 - 1.0).abs() < 1e-6);
        assert!(propagate(2.0, 1.0, 1.0, 1.0).is_err());
        // monotone in s
        let a = propagate(5.0, 1.5, 0.1, 0.3).unwrap().bound;
        let b = propagate(5.0, 1.5, 0.1, 0.35).unwrap().bound;
        assert!(b > a);
        // iterating D twice on y² stays under the bound with C = 64·1.05
        let g = grid(128.0);
        let v = ScalarField::from_fn(&g, |_, y| y * y);
        let iterated = doubling_ratio(&v, (0.0, 0.0), 0.125).unwrap() * doubling_ratio(&v, (0.0, 0.0), 0.25).unwrap();
        assert!(iterated <= propagate(64.0 * 1.05, 1.0, 0.125, 0.5).unwrap().bound);
    }
}
