use serde::Serialize;

use super::scan::{half_ball_mass, UNDERFLOW_FLOOR};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::field::{derive, integrate, tensor_norm_sq, Half, Region, ScalarField};

/// Radii below this many cells are excluded from the Caccioppoli scan.
pub const CACCIOPPOLI_MIN_CELLS: f64 = 8.0;
pub const MAX_CACCIOPPOLI_ORDER: usize = 6;

/// `∂x^a ∂y^b f` for `a + b ≤ 6`; orders above four difference the
/// fourth-order partials again.
pub fn high_derivative(f: &ScalarField, a: usize, b: usize) -> Result<ScalarField> {
    if a + b <= 4 {
        return derive(f, (a, b));
    }
    let a1 = a.min(4);
    let base = derive(f, (a1, 4 - a1))?;
    derive(&base, (a - a1, b - (4 - a1)))
}

/// `|D^k f|²` as a full tensor norm, for `k ≤ 6`.
pub fn jet_norm_sq(f: &ScalarField, k: usize) -> Result<ScalarField> {
    if k == 0 {
        return f.mul(f);
    }
    let parts = (0..=k).rev().map(|a| Ok((a, k - a, high_derivative(f, a, k - a)?))).collect::<Result<Vec<_>>>()?;
    tensor_norm_sq(&parts)
}

fn half_ball_norm(f_sq: &ScalarField, center: (f64, f64), r: f64) -> Result<f64> {
    Ok(integrate(f_sq, &Region::disc(center, r, Half::Upper).weights(f_sq.grid()))?.max(0.0).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaccioppoliRow {
    pub r: f64,
    pub order: usize,
    /// `r^h ‖D^h u‖_{B⁺_{r/2}} / ‖u‖_{B⁺_r}`
    pub c_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaccioppoliScan {
    pub rows: Vec<CaccioppoliRow>,
    /// Requested radii under the `8h` resolution floor.
    pub excluded: Vec<f64>,
}

impl CaccioppoliScan {
    pub fn max_for(&self, order: usize) -> f64 {
        self.rows.iter().filter(|r| r.order == order).map(|r| r.c_hat).fold(0.0, f64::max)
    }

    /// `max / min − 1` of `Ĉ_h` across radii.
    pub fn variation(&self, order: usize) -> f64 {
        let v: Vec<f64> = self.rows.iter().filter(|r| r.order == order).map(|r| r.c_hat).collect();
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        hi / lo - 1.0
    }
}

pub fn caccioppoli_scan(u: &ScalarField, center: (f64, f64), radii: &[f64], max_order: usize, exec: Execution) -> Result<CaccioppoliScan> {
    if max_order == 0 || max_order > MAX_CACCIOPPOLI_ORDER {
        return Err(Error::usage(format!("Caccioppoli orders run 1..=6, got {max_order}")));
    }
    let floor = CACCIOPPOLI_MIN_CELLS * u.grid().h;
    let (kept, excluded): (Vec<f64>, Vec<f64>) = radii.iter().partition(|r| **r >= floor * (1.0 - 1e-12));
    let jets = (1..=max_order).map(|k| jet_norm_sq(u, k)).collect::<Result<Vec<_>>>()?;
    let per_radius = exec.map(&kept, |&r| -> Result<Vec<CaccioppoliRow>> {
        let den = half_ball_mass(u, center, r)?;
        if !(den > UNDERFLOW_FLOOR) {
            return Err(Error::VanishingDenominator(format!("‖u‖ on the half ball of radius {r}")));
        }
        jets.iter()
            .enumerate()
            .map(|(k, jet)| {
                let order = k + 1;
                let num = half_ball_norm(jet, center, r / 2.0)?;
                Ok(CaccioppoliRow { r, order, c_hat: r.powi(order as i32) * num / den.sqrt() })
            })
            .collect()
    });
    let mut rows = Vec::new();
    for chunk in per_radius {
        rows.extend(chunk?);
    }
    Ok(CaccioppoliScan { rows, excluded })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterpolationRow {
    pub eps: f64,
    /// `r^j ‖D^j v‖`
    pub lhs: f64,
    /// `ε r^m ‖D^m v‖ + ε^{−j/(m−j)} ‖v‖`
    pub rhs: f64,
    pub c_hat: f64,
}

/// Empirical constants of the interpolation inequality on `B⁺_r(center)`.
pub fn interpolation_scan(v: &ScalarField, center: (f64, f64), r: f64, m: usize, j: usize, eps: &[f64]) -> Result<Vec<InterpolationRow>> {
    if !(1 <= j && j < m && m <= 4) {
        return Err(Error::usage(format!("interpolation needs 1 <= j < m <= 4, got j={j}, m={m}")));
    }
    if eps.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
        return Err(Error::usage("interpolation ε must lie in (0, 1]"));
    }
    half_ball_mass(v, center, r)?;
    let norm = |k: usize| -> Result<f64> { half_ball_norm(&jet_norm_sq(v, k)?, center, r) };
    let (n0, nj, nm) = (norm(0)?, norm(j)?, norm(m)?);
    let lhs = r.powi(j as i32) * nj;
    Ok(eps
        .iter()
        .map(|&e| {
            let rhs = e * r.powi(m as i32) * nm + e.powf(-(j as f64) / (m - j) as f64) * n0;
            let c_hat = if rhs > 0.0 { lhs / rhs } else { 0.0 };
            InterpolationRow { eps: e, lhs, rhs, c_hat }
        })
        .collect())
}

/// `|D³v|` on the bottom row, by the one-sided stencils of [`derive`].
pub fn third_derivative_trace(v: &ScalarField) -> Result<Vec<f64>> {
    let sq = jet_norm_sq(v, 3)?;
    Ok((0..v.grid().nx).map(|i| sq.at(i, 0).max(0.0).sqrt()).collect())
}

/// `(⨍_I |D³v|^q)^{1/q} / (⨍_I |D³v|²)^{1/2}` on `I = [P − half, P + half]`
/// along `y = y_min`, with trapezoid means.
pub fn reverse_holder_ratio(v: &ScalarField, p: f64, half: f64, q: f64) -> Result<f64> {
    let trace = third_derivative_trace(v)?;
    reverse_holder_from_trace(v, &trace, p, half, q)
}

fn reverse_holder_from_trace(v: &ScalarField, trace: &[f64], p: f64, half: f64, q: f64) -> Result<f64> {
    if !(q > 2.0 && q <= 8.0) {
        return Err(Error::usage(format!("reverse Hölder exponent must lie in (2, 8], got {q}")));
    }
    let g = v.grid();
    let tol = 1e-9 * g.h;
    let nodes: Vec<usize> = (0..g.nx).filter(|&i| (g.x(i) - p).abs() <= half + tol).collect();
    if nodes.len() < 2 {
        return Err(Error::usage(format!("interval [{}, {}] holds fewer than two nodes", p - half, p + half)));
    }
    let peak = nodes.iter().map(|&i| trace[i]).fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::VanishingTrace);
    }
    // normalizing by the peak makes a constant trace give exactly 1
    let mean = |power: f64| -> f64 {
        let mut num = crate::field::NeumaierSum::default();
        let mut den = crate::field::NeumaierSum::default();
        for (k, &i) in nodes.iter().enumerate() {
            let w = if k == 0 || k + 1 == nodes.len() { 0.5 } else { 1.0 };
            num.add(w * (trace[i] / peak).powf(power));
            den.add(w);
        }
        num.total() / den.total()
    };
    Ok(mean(q).powf(1.0 / q) / mean(2.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReverseHolderRow {
    pub half_width: f64,
    pub ratio: f64,
}

/// Dyadic intervals `half_max · 2^{−k}` centred at `p`, down to 8 cells.
pub fn reverse_holder_scan(v: &ScalarField, p: f64, half_max: f64, q: f64) -> Result<Vec<ReverseHolderRow>> {
    let trace = third_derivative_trace(v)?;
    let floor = 8.0 * v.grid().h;
    (0..)
        .map(|k| half_max / 2f64.powi(k))
        .take_while(|w| *w >= floor * (1.0 - 1e-12))
        .map(|w| Ok(ReverseHolderRow { half_width: w, ratio: reverse_holder_from_trace(v, &trace, p, w, q)? }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GridSpec;

    fn grid(n: f64) -> GridSpec {
        GridSpec::with_spacing((-1.0, 1.0), (0.0, 1.0), 1.0 / n).unwrap()
    }

    #[test]
    fn caccioppoli_first_order_y_squared() {
        let g = grid(128.0);
        let u = ScalarField::from_fn(&g, |_, y| y * y);
        let s = caccioppoli_scan(&u, (0.0, 0.0), &[0.5, 0.25, 0.125, 0.03], 2, Execution::Sequential).unwrap();
        assert_eq!(s.excluded, vec![0.03]);
        for row in s.rows.iter().filter(|r| r.order == 1) {
            assert!((row.c_hat / std::f64::consts::FRAC_1_SQRT_2 - 1.0).abs() < 0.02, "{row:?}");
        }
        assert!(s.variation(1) < 0.02);
        let zero = caccioppoli_scan(&ScalarField::zeros(&g), (0.0, 0.0), &[0.5], 1, Execution::Sequential);
        assert_eq!(zero.unwrap_err().id(), "vanishing-denominator");
    }

    #[test]
    fn high_derivatives_of_polynomials() {
        let g = grid(32.0);
        let f = ScalarField::from_fn(&g, |x, y| x.powi(4) * y * y + y.powi(3));
        let d = high_derivative(&f, 4, 2).unwrap();
        assert!((d.at(20, 10) - 48.0).abs() < 1e-4, "{}", d.at(20, 10));
        assert!(high_derivative(&f, 5, 0).unwrap().max_abs() < 1e-4);
    }

    #[test]
    fn interpolation_closed_form() {
        let g = grid(128.0);
        let v = ScalarField::from_fn(&g, |_, y| y * y);
        let rows = interpolation_scan(&v, (0.0, 0.0), 0.5, 2, 1, &[1.0]).unwrap();
        let pi = std::f64::consts::PI;
        let exact = (pi / 2.0).sqrt() / ((2.0 * pi).sqrt() + (pi / 16.0).sqrt());
        assert!((rows[0].c_hat / exact - 1.0).abs() < 0.01, "{rows:?}");
        assert!((exact - 0.4249).abs() < 1e-4);
        let small = interpolation_scan(&v, (0.0, 0.0), 0.5, 2, 1, &[0.5, 0.25, 0.1, 0.05]).unwrap();
        assert!(small.windows(2).all(|w| w[1].c_hat < w[0].c_hat));
        assert!(interpolation_scan(&v, (0.0, 0.0), 0.5, 2, 2, &[1.0]).is_err());
        let zero = interpolation_scan(&ScalarField::zeros(&g), (0.0, 0.0), 0.5, 3, 1, &[0.5]).unwrap();
        assert_eq!(zero[0].c_hat, 0.0);
    }

    #[test]
    fn reverse_holder_cases() {
        let g = grid(64.0);
        // |D³v| = 6 on the whole boundary row
        let v = ScalarField::from_fn(&g, |_, y| y * y * y);
        for q in [3.0, 4.0, 8.0] {
            let r = reverse_holder_ratio(&v, 0.0, 0.5, q).unwrap();
            assert!((r - 1.0).abs() < 1e-9, "{r}");
        }
        let lin = ScalarField::from_fn(&g, |x, y| y * y * y * (1.0 + x));
        assert!(reverse_holder_ratio(&lin, 0.0, 0.5, 4.0).unwrap() > 1.0);
        let flat = ScalarField::from_fn(&g, |_, y| y * y);
        assert_eq!(reverse_holder_ratio(&flat, 0.0, 0.5, 4.0).unwrap_err().id(), "vanishing-trace");
        assert!(reverse_holder_ratio(&v, 0.0, 0.5, 2.0).is_err());
    }
}
