use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::logvalue::{LogValue, NeumaierSum};
use super::{GridSpec, Mask, ScalarField};
use crate::error::{Error, Result};

/// Which part of a sector relative to the horizontal line through its centre.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Half {
    Whole,
    Upper,
    Lower,
}

/// Integration region on a grid.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// Node set; each cell contributes `h²/4` per corner inside the set.
    Nodes(Mask),
    /// `{inner ≤ |x - center| ≤ outer}` intersected with a half plane.
    /// Cells cut by the boundary are sub-sampled.
    Sector { center: (f64, f64), inner: f64, outer: f64, half: Half },
}

impl Region {
    pub fn disc(center: (f64, f64), radius: f64, half: Half) -> Self {
        Region::Sector { center, inner: 0.0, outer: radius, half }
    }

    pub fn annulus(center: (f64, f64), inner: f64, outer: f64, half: Half) -> Self {
        Region::Sector { center, inner, outer, half }
    }

    pub fn weights(&self, grid: &GridSpec) -> QuadratureWeights {
        match self {
            Region::Nodes(mask) => node_weights(grid, mask),
            Region::Sector { center, inner, outer, half } => {
                sector_weights(grid, *center, *inner, *outer, *half)
            }
        }
    }
}

/// Sub-samples per axis for cells cut by a curved boundary.
const SUBSAMPLES: usize = 8;

/// Nonzero nodal quadrature weights `(i, j, w)`; integrals are `Σ w f(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureWeights {
    grid: GridSpec,
    entries: Vec<(usize, usize, f64)>,
}

impl QuadratureWeights {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.2).collect::<NeumaierSum>().total()
    }

    /// Nodes carrying weight, as a mask.
    pub fn support(&self) -> Mask {
        let mut cells = Array2::from_elem(self.grid.shape(), false);
        for &(i, j, _) in &self.entries {
            cells[[j, i]] = true;
        }
        Mask::from_array(cells)
    }

    fn check(&self, f: &ScalarField) -> Result<()> {
        if !self.grid.same_as(f.grid()) {
            return Err(Error::ShapeMismatch("quadrature grid differs from field grid".into()));
        }
        if self.entries.is_empty() {
            return Err(Error::EmptyIntegrationRegion);
        }
        if let Some(&(i, j, _)) = self.entries.iter().find(|&&(i, j, _)| !f.mask().get(i, j)) {
            return Err(Error::RegionOutsideMask { i, j });
        }
        Ok(())
    }
}

fn node_weights(grid: &GridSpec, mask: &Mask) -> QuadratureWeights {
    let (nx, ny) = (grid.nx, grid.ny);
    let quarter = grid.h * grid.h / 4.0;
    let mut entries = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if mask.get(i, j) {
                let cx = if i == 0 || i == nx - 1 { 1 } else { 2 };
                let cy = if j == 0 || j == ny - 1 { 1 } else { 2 };
                entries.push((i, j, quarter * (cx * cy) as f64));
            }
        }
    }
    QuadratureWeights { grid: *grid, entries }
}

fn sector_weights(
    grid: &GridSpec,
    center: (f64, f64),
    inner: f64,
    outer: f64,
    half: Half,
) -> QuadratureWeights {
    let h = grid.h;
    let tol = 1e-12 * h;
    let mut w = Array2::<f64>::zeros(grid.shape());
    let in_half = |y: f64| match half {
        Half::Whole => true,
        Half::Upper => y >= center.1 - tol,
        Half::Lower => y <= center.1 + tol,
    };
    let inside = |x: f64, y: f64| {
        let d = (x - center.0).hypot(y - center.1);
        d >= inner && d <= outer && in_half(y)
    };
    let sub = SUBSAMPLES as f64;
    let sub_area = h * h / (sub * sub);
    for j0 in 0..grid.ny - 1 {
        let (ya, yb) = (grid.y(j0), grid.y(j0 + 1));
        let half_state = match half {
            Half::Whole => Some(true),
            Half::Upper if ya >= center.1 - tol => Some(true),
            Half::Upper if yb <= center.1 + tol => Some(false),
            Half::Lower if yb <= center.1 + tol => Some(true),
            Half::Lower if ya >= center.1 - tol => Some(false),
            _ => None,
        };
        if half_state == Some(false) {
            continue;
        }
        for i0 in 0..grid.nx - 1 {
            let (xa, xb) = (grid.x(i0), grid.x(i0 + 1));
            let dx_near = (center.0.clamp(xa, xb) - center.0).abs();
            let dy_near = (center.1.clamp(ya, yb) - center.1).abs();
            let dmin = dx_near.hypot(dy_near);
            let dx_far = (xa - center.0).abs().max((xb - center.0).abs());
            let dy_far = (ya - center.1).abs().max((yb - center.1).abs());
            let dmax = dx_far.hypot(dy_far);
            if dmax < inner || dmin > outer {
                continue;
            }
            if half_state == Some(true) && dmin >= inner && dmax <= outer {
                w[[j0, i0]] += h * h / 4.0;
                w[[j0, i0 + 1]] += h * h / 4.0;
                w[[j0 + 1, i0]] += h * h / 4.0;
                w[[j0 + 1, i0 + 1]] += h * h / 4.0;
                continue;
            }
            for q in 0..SUBSAMPLES {
                let b = (q as f64 + 0.5) / sub;
                for p in 0..SUBSAMPLES {
                    let a = (p as f64 + 0.5) / sub;
                    if inside(xa + a * h, ya + b * h) {
                        w[[j0, i0]] += sub_area * (1.0 - a) * (1.0 - b);
                        w[[j0, i0 + 1]] += sub_area * a * (1.0 - b);
                        w[[j0 + 1, i0]] += sub_area * (1.0 - a) * b;
                        w[[j0 + 1, i0 + 1]] += sub_area * a * b;
                    }
                }
            }
        }
    }
    let entries = w
        .indexed_iter()
        .filter(|(_, &v)| v > 0.0)
        .map(|((j, i), &v)| (i, j, v))
        .collect();
    QuadratureWeights { grid: *grid, entries }
}

/// `∫ f` over the region described by `weights`.
pub fn integrate(f: &ScalarField, weights: &QuadratureWeights) -> Result<f64> {
    weights.check(f)?;
    Ok(weights
        .entries
        .iter()
        .map(|&(i, j, w)| w * f.at(i, j))
        .collect::<NeumaierSum>()
        .total())
}

/// `∫ f · exp(log_weight)` for `f ≥ 0`, carried in log space.
pub fn weighted_integrate_log(
    f: &ScalarField,
    log_weight: &ScalarField,
    weights: &QuadratureWeights,
) -> Result<LogValue> {
    weighted_log_impl(f, log_weight, weights, false)
}

/// `∫ f² · exp(log_weight)`, squaring internally so `f` may change sign.
pub fn weighted_integrate_log_sq(
    f: &ScalarField,
    log_weight: &ScalarField,
    weights: &QuadratureWeights,
) -> Result<LogValue> {
    weighted_log_impl(f, log_weight, weights, true)
}

fn weighted_log_impl(
    f: &ScalarField,
    log_weight: &ScalarField,
    weights: &QuadratureWeights,
    square: bool,
) -> Result<LogValue> {
    weights.check(f)?;
    f.check_same_grid(log_weight)?;
    let mut lns = Vec::with_capacity(weights.entries.len());
    for &(i, j, w) in &weights.entries {
        let v = f.at(i, j);
        let v = if square { v * v } else { v };
        if v < 0.0 {
            return Err(Error::NegativeIntegrand { i, j, value: v });
        }
        if v == 0.0 {
            continue;
        }
        let lw = log_weight.at(i, j);
        if lw.is_nan() || lw == f64::INFINITY {
            return Err(Error::WeightSingularityOnSupport { i, j, value: lw });
        }
        lns.push(w.ln() + v.ln() + lw);
    }
    Ok(LogValue::sum_ln(lns))
}
