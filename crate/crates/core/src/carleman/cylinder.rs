use std::f64::consts::PI;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{LogValue, NeumaierSum};

/// Uniform `(t, θ)` grid on `[t_min, t_max] × [0, 2π)`, θ periodic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub nt: usize,
    pub ntheta: usize,
    pub ht: f64,
}

impl CylinderGrid {
    pub fn new(t_min: f64, t_max: f64, nt: usize, ntheta: usize) -> Result<Self> {
        if !(t_min < t_max) || nt < 9 || ntheta < 8 || !ntheta.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "cylinder grid needs t_min < t_max, nt >= 9 and even ntheta >= 8; got [{t_min}, {t_max}], {nt}, {ntheta}"
            )));
        }
        Ok(Self { t_min, t_max, nt, ntheta, ht: (t_max - t_min) / (nt - 1) as f64 })
    }

    /// Grid over `[t_min, t_max]` with spacing at most `ht`.
    pub fn with_spacing(t_min: f64, t_max: f64, ht: f64, ntheta: usize) -> Result<Self> {
        let nt = ((t_max - t_min) / ht).ceil() as usize + 1;
        Self::new(t_min, t_max, nt.max(9), ntheta)
    }

    /// `[log(r/8), 0]`, one octave below the support of test functions at
    /// scale `r`.
    pub fn for_scale(r: f64, ht: f64, ntheta: usize) -> Result<Self> {
        Self::with_spacing((r / 8.0).ln(), 0.0, ht, ntheta)
    }

    pub fn t(&self, i: usize) -> f64 {
        self.t_min + i as f64 * self.ht
    }

    pub fn theta(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.ntheta as f64
    }

    pub fn h_theta(&self) -> f64 {
        2.0 * PI / self.ntheta as f64
    }

    pub fn refined(&self) -> Self {
        Self { nt: 2 * self.nt - 1, ntheta: 2 * self.ntheta, ht: self.ht / 2.0, ..*self }
    }

    /// Trapezoid weight of row `i` in t.
    fn trap(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.nt { 0.5 * self.ht } else { self.ht }
    }
}

/// Values on a [`CylinderGrid`], indexed `[(i_t, k_θ)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderField {
    grid: CylinderGrid,
    values: Array2<f64>,
}

/// Periodic spectral differentiation matrices for an even number of nodes;
/// exact on trigonometric polynomials of degree below `n/2`.
struct SpectralTheta {
    d1: Array2<f64>,
    d2: Array2<f64>,
}

impl SpectralTheta {
    fn new(n: usize) -> Self {
        let h = 2.0 * PI / n as f64;
        let mut d1 = Array2::zeros((n, n));
        let mut d2 = Array2::zeros((n, n));
        for j in 0..n {
            for k in 0..n {
                if j == k {
                    d2[(j, k)] = -PI * PI / (3.0 * h * h) - 1.0 / 6.0;
                    continue;
                }
                let diff = j as f64 - k as f64;
                let sign = if (j + n - k).is_multiple_of(2) { 1.0 } else { -1.0 };
                let half = diff * h / 2.0;
                d1[(j, k)] = 0.5 * sign / half.tan();
                d2[(j, k)] = -0.5 * sign / (half.sin() * half.sin());
            }
        }
        Self { d1, d2 }
    }
}

impl CylinderField {
    pub fn from_fn(grid: &CylinderGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = Array2::from_shape_fn((grid.nt, grid.ntheta), |(i, k)| f(grid.t(i), grid.theta(k)));
        Self { grid: *grid, values }
    }

    /// Values from node indices `(i_t, k_θ)`.
    pub fn from_index_fn(grid: &CylinderGrid, f: impl Fn(usize, usize) -> f64) -> Self {
        Self { grid: *grid, values: Array2::from_shape_fn((grid.nt, grid.ntheta), |(i, k)| f(i, k)) }
    }

    pub fn zeros(grid: &CylinderGrid) -> Self {
        Self { grid: *grid, values: Array2::zeros((grid.nt, grid.ntheta)) }
    }

    pub fn grid(&self) -> &CylinderGrid {
        &self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn at(&self, i: usize, k: usize) -> f64 {
        self.values[(i, k)]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.mapv(f) }
    }

    /// Pointwise `f(t, θ, value)`.
    pub fn map_indexed(&self, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let g = self.grid;
        let values = Array2::from_shape_fn(self.values.dim(), |(i, k)| f(g.t(i), g.theta(k), self.values[(i, k)]));
        Self { grid: g, values }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        let mut values = self.values.clone();
        values.zip_mut_with(&other.values, |a, b| *a = f(*a, *b));
        Self { grid: self.grid, values }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    /// Errors if the field is nonzero within `margin` rows of either t end.
    pub fn check_support(&self, margin: usize) -> Result<()> {
        let scale = self.max_abs();
        let nt = self.grid.nt;
        let worst = (0..margin.min(nt))
            .flat_map(|i| [i, nt - 1 - i])
            .flat_map(|i| self.values.row(i).to_vec())
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        if worst > 1e-14 * scale {
            return Err(Error::SupportTruncation { value: worst });
        }
        Ok(())
    }

    /// Second-order `∂_t`, one-sided at the ends.
    pub fn dt(&self) -> Self {
        let (nt, h) = (self.grid.nt, self.grid.ht);
        let v = &self.values;
        let values = Array2::from_shape_fn(v.dim(), |(i, k)| {
            if i == 0 {
                (-3.0 * v[(0, k)] + 4.0 * v[(1, k)] - v[(2, k)]) / (2.0 * h)
            } else if i + 1 == nt {
                (3.0 * v[(i, k)] - 4.0 * v[(i - 1, k)] + v[(i - 2, k)]) / (2.0 * h)
            } else {
                (v[(i + 1, k)] - v[(i - 1, k)]) / (2.0 * h)
            }
        });
        Self { grid: self.grid, values }
    }

    /// Second-order `∂_tt`, one-sided at the ends.
    pub fn dtt(&self) -> Self {
        let (nt, h) = (self.grid.nt, self.grid.ht);
        let v = &self.values;
        let values = Array2::from_shape_fn(v.dim(), |(i, k)| {
            let s = if i == 0 {
                2.0 * v[(0, k)] - 5.0 * v[(1, k)] + 4.0 * v[(2, k)] - v[(3, k)]
            } else if i + 1 == nt {
                2.0 * v[(i, k)] - 5.0 * v[(i - 1, k)] + 4.0 * v[(i - 2, k)] - v[(i - 3, k)]
            } else {
                v[(i + 1, k)] - 2.0 * v[(i, k)] + v[(i - 1, k)]
            };
            s / (h * h)
        });
        Self { grid: self.grid, values }
    }

    fn theta_apply(&self, second: bool) -> Self {
        let sp = SpectralTheta::new(self.grid.ntheta);
        let m = if second { &sp.d2 } else { &sp.d1 };
        // rows are t-levels: out_row = m · row
        let values = self.values.dot(&m.t());
        Self { grid: self.grid, values }
    }

    /// Spectral `∂_θ`.
    pub fn dtheta(&self) -> Self {
        self.theta_apply(false)
    }

    /// Spectral `∂_θθ`.
    pub fn dthetatheta(&self) -> Self {
        self.theta_apply(true)
    }

    /// `L f = f_tt + f_θθ`.
    pub fn cylinder_laplacian(&self) -> Self {
        self.dtt().add(&self.dthetatheta())
    }

    /// Cartesian `∂_x = e^{−t}(cos θ ∂_t − sin θ ∂_θ)`.
    pub fn dx(&self) -> Self {
        let (ft, fth) = (self.dt(), self.dtheta());
        let g = self.grid;
        let values = Array2::from_shape_fn(self.values.dim(), |(i, k)| {
            let (s, c) = g.theta(k).sin_cos();
            (-g.t(i)).exp() * (c * ft.values[(i, k)] - s * fth.values[(i, k)])
        });
        Self { grid: g, values }
    }

    /// Cartesian `∂_y = e^{−t}(sin θ ∂_t + cos θ ∂_θ)`.
    pub fn dy(&self) -> Self {
        let (ft, fth) = (self.dt(), self.dtheta());
        let g = self.grid;
        let values = Array2::from_shape_fn(self.values.dim(), |(i, k)| {
            let (s, c) = g.theta(k).sin_cos();
            (-g.t(i)).exp() * (s * ft.values[(i, k)] + c * fth.values[(i, k)])
        });
        Self { grid: g, values }
    }

    /// Cartesian `Δ = e^{−2t} L`.
    pub fn laplacian(&self) -> Self {
        self.cylinder_laplacian().map_indexed(|t, _, v| (-2.0 * t).exp() * v)
    }

    /// `∫∫ f dθ dt` (trapezoid in t, periodic rectangle rule in θ).
    pub fn integrate(&self) -> f64 {
        self.row_integrals().iter().enumerate().map(|(i, r)| self.grid.trap(i) * r).collect::<NeumaierSum>().total()
    }

    /// `∫ f dθ` for each t-level.
    pub fn row_integrals(&self) -> Vec<f64> {
        let hth = self.grid.h_theta();
        self.values.rows().into_iter().map(|r| hth * r.iter().copied().collect::<NeumaierSum>().total()).collect()
    }
}

/// θ-integrated densities of a nonnegative quantity, ready for repeated
/// weighting by functions of t.
#[derive(Debug, Clone, PartialEq)]
pub struct RowDensity {
    grid: CylinderGrid,
    rows: Vec<f64>,
}

impl RowDensity {
    pub fn new(f: &CylinderField) -> Result<Self> {
        if let Some(((i, k), v)) = f.values.indexed_iter().find(|(_, v)| **v < 0.0 || !v.is_finite()) {
            return Err(Error::NegativeIntegrand { i, j: k, value: *v });
        }
        Ok(Self { grid: f.grid, rows: f.row_integrals() })
    }

    /// `∫∫ e^{log_weight(t)} f dθ dt` in log space.
    pub fn weighted(&self, log_weight: impl Fn(f64) -> f64) -> LogValue {
        LogValue::sum_ln(self.rows.iter().enumerate().filter(|(_, r)| **r > 0.0).map(|(i, r)| {
            log_weight(self.grid.t(i)) + (self.grid.trap(i) * r).ln()
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_theta_exact_on_trig() {
        let g = CylinderGrid::new(-2.0, 0.0, 21, 16).unwrap();
        let f = CylinderField::from_fn(&g, |t, th| t * (3.0 * th).sin() + (7.0 * th).cos());
        let d = f.dtheta();
        let dd = f.dthetatheta();
        let e1 = CylinderField::from_fn(&g, |t, th| 3.0 * t * (3.0 * th).cos() - 7.0 * (7.0 * th).sin());
        let e2 = CylinderField::from_fn(&g, |t, th| -9.0 * t * (3.0 * th).sin() - 49.0 * (7.0 * th).cos());
        assert!(d.sub(&e1).max_abs() < 1e-11);
        assert!(dd.sub(&e2).max_abs() < 1e-10);
    }

    #[test]
    fn cartesian_derivatives_of_polynomials() {
        // u = x²y, exact up to the t-discretization of e^{kt}
        let g = CylinderGrid::new(-1.5, 0.0, 1201, 16).unwrap();
        let f = CylinderField::from_fn(&g, |t, th| (3.0 * t).exp() * th.cos().powi(2) * th.sin());
        let ux = CylinderField::from_fn(&g, |t, th| 2.0 * (2.0 * t).exp() * th.cos() * th.sin());
        let lap = CylinderField::from_fn(&g, |t, th| 2.0 * t.exp() * th.sin());
        let inner = |f: &CylinderField| {
            let mut m: f64 = 0.0;
            for i in 2..g.nt - 2 {
                for k in 0..g.ntheta {
                    m = m.max(f.at(i, k).abs());
                }
            }
            m
        };
        assert!(inner(&f.dx().sub(&ux)) < 1e-5);
        assert!(inner(&f.laplacian().sub(&lap)) < 1e-5);
    }

    #[test]
    fn support_and_integrals() {
        let g = CylinderGrid::new(-3.0, 0.0, 301, 8).unwrap();
        let f = CylinderField::from_fn(&g, |t, _| if (-2.0..-1.0).contains(&t) { 1.0 } else { 0.0 });
        assert!(f.check_support(5).is_ok());
        let one = CylinderField::from_fn(&g, |_, _| 1.0);
        assert_eq!(one.check_support(3).unwrap_err().id(), "support-truncation");
        assert!((one.integrate() - 6.0 * PI).abs() < 1e-12);
        let d = RowDensity::new(&one).unwrap();
        assert!((d.weighted(|_| 0.0).to_f64() - 6.0 * PI).abs() < 1e-11);
        assert!((d.weighted(|_| 700.0).ln() - (700.0 + (6.0 * PI).ln())).abs() < 1e-12);
    }
}
