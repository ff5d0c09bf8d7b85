use ndarray::Array2;

use super::{GridSpec, Mask};
use crate::error::{Error, Result};

/// Grid samples of a function together with the domain mask. Values outside
/// the mask are carried but never read by the derivative or quadrature code.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Array2<f64>,
    mask: Mask,
}

impl ScalarField {
    /// Checks shapes, finiteness on the mask and edge connectivity of the mask.
    pub fn new(grid: GridSpec, values: Array2<f64>, mask: Mask) -> Result<Self> {
        if values.dim() != grid.shape() || mask.shape() != grid.shape() {
            return Err(Error::ShapeMismatch(format!(
                "grid {:?}, values {:?}, mask {:?}",
                grid.shape(),
                values.dim(),
                mask.shape()
            )));
        }
        if let Some(((j, i), _)) = values
            .indexed_iter()
            .find(|&((j, i), v)| mask.get(i, j) && !v.is_finite())
        {
            return Err(Error::NonFiniteValue { i, j });
        }
        if !mask.is_connected() {
            return Err(Error::InvalidGrid("mask is not edge-connected".into()));
        }
        Ok(Self { grid, values, mask })
    }

    /// Internal constructor for results derived from an already validated
    /// field; skips the connectivity scan.
    pub(crate) fn from_parts(grid: GridSpec, values: Array2<f64>, mask: Mask) -> Self {
        debug_assert_eq!(values.dim(), grid.shape());
        Self { grid, values, mask }
    }

    pub fn from_fn(grid: &GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = Array2::from_shape_fn(grid.shape(), |(j, i)| f(grid.x(i), grid.y(j)));
        Self { grid: *grid, values, mask: Mask::full(grid) }
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        Self { grid: *grid, values: Array2::zeros(grid.shape()), mask: Mask::full(grid) }
    }

    pub fn constant(grid: &GridSpec, c: f64) -> Self {
        Self { grid: *grid, values: Array2::from_elem(grid.shape(), c), mask: Mask::full(grid) }
    }

    pub fn with_mask(self, mask: Mask) -> Result<Self> {
        Self::new(self.grid, self.values, mask)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn mask(&self) -> &Mask {
        &self.mask
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[[j, i]]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_parts(self.grid, self.values.mapv(f), self.mask.clone())
    }

    /// Pointwise combination; the result mask is the intersection.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_grid(other)?;
        let mut values = self.values.clone();
        values.zip_mut_with(&other.values, |a, &b| *a = f(*a, b));
        Ok(Self::from_parts(self.grid, values, self.mask.and(&other.mask)))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Linear combination `sum c_k f_k` over fields on a common grid.
    pub fn combine(terms: &[(f64, &ScalarField)]) -> Result<Self> {
        let (_, first) = terms.first().ok_or_else(|| Error::usage("empty combination"))?;
        let mut out = first.scale(0.0);
        for (c, f) in terms {
            out = out.zip_with(f, |a, b| a + c * b)?;
        }
        Ok(out)
    }

    /// Max |value| over `region` (defaults to the field mask).
    pub fn max_abs_on(&self, region: Option<&Mask>) -> f64 {
        let region = region.unwrap_or(&self.mask);
        self.values
            .indexed_iter()
            .filter(|&((j, i), _)| region.get(i, j) && self.mask.get(i, j))
            .fold(0.0_f64, |m, (_, v)| m.max(v.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_on(None)
    }

    /// Bilinear interpolation at `(x, y)`; `None` if any of the four cell
    /// corners is outside the grid or the mask.
    pub fn sample(&self, x: f64, y: f64) -> Option<f64> {
        let g = &self.grid;
        let fx = (x - g.x_min) / g.h;
        let fy = (y - g.y_min) / g.h;
        let eps = 1e-9;
        if fx < -eps || fy < -eps || fx > (g.nx - 1) as f64 + eps || fy > (g.ny - 1) as f64 + eps {
            return None;
        }
        let i0 = (fx.floor().max(0.0) as usize).min(g.nx - 2);
        let j0 = (fy.floor().max(0.0) as usize).min(g.ny - 2);
        let a = (fx - i0 as f64).clamp(0.0, 1.0);
        let b = (fy - j0 as f64).clamp(0.0, 1.0);
        let corners = [(i0, j0), (i0 + 1, j0), (i0, j0 + 1), (i0 + 1, j0 + 1)];
        if corners.iter().any(|&(i, j)| !self.mask.get(i, j)) {
            return None;
        }
        let lerp = |u: f64, v: f64, t: f64| u + t * (v - u);
        let bottom = lerp(self.at(i0, j0), self.at(i0 + 1, j0), a);
        let top = lerp(self.at(i0, j0 + 1), self.at(i0 + 1, j0 + 1), a);
        Some(lerp(bottom, top, b))
    }

    pub(crate) fn check_same_grid(&self, other: &Self) -> Result<()> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::ShapeMismatch(format!(
                "fields live on different grids: {:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }
}
