use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid with equal spacing in both axes. Node `(i, j)` sits at
/// `(x_min + i h, y_min + j h)`; arrays are stored with shape `(ny, nx)` and
/// indexed `[[j, i]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
}

pub const MIN_POINTS: usize = 9;
const SPACING_RTOL: f64 = 1e-12;

impl GridSpec {
    pub fn new(x: (f64, f64), y: (f64, f64), nx: usize, ny: usize) -> Result<Self> {
        if nx < MIN_POINTS || ny < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need nx, ny >= {MIN_POINTS}, got {nx}x{ny}"
            )));
        }
        if !(x.1 > x.0) || !(y.1 > y.0) || !x.0.is_finite() || !y.1.is_finite() {
            return Err(Error::InvalidGrid(format!("bad ranges {x:?} x {y:?}")));
        }
        let hx = (x.1 - x.0) / (nx - 1) as f64;
        let hy = (y.1 - y.0) / (ny - 1) as f64;
        if ((hx - hy) / hx).abs() > SPACING_RTOL {
            return Err(Error::InvalidGrid(format!(
                "unequal spacing hx={hx:e}, hy={hy:e}"
            )));
        }
        Ok(Self { x_min: x.0, x_max: x.1, y_min: y.0, y_max: y.1, nx, ny, h: hx })
    }

    /// Grid over the given ranges with spacing `h`; the ranges must be
    /// integer multiples of `h`.
    pub fn with_spacing(x: (f64, f64), y: (f64, f64), h: f64) -> Result<Self> {
        let count = |a: f64, b: f64| -> Result<usize> {
            let n = (b - a) / h;
            let r = n.round();
            if (n - r).abs() > 1e-9 * n.max(1.0) {
                return Err(Error::InvalidGrid(format!(
                    "range [{a}, {b}] is not a multiple of h={h}"
                )));
            }
            Ok(r as usize + 1)
        };
        Self::new(x, y, count(x.0, x.1)?, count(y.0, y.1)?)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.h
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.y_min + j as f64 * self.h
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.ny, self.nx)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Nearest node to `(x, y)`, if it lies on the grid to within 1e-9 h.
    pub fn node_at(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let fi = (x - self.x_min) / self.h;
        let fj = (y - self.y_min) / self.h;
        let (ri, rj) = (fi.round(), fj.round());
        if (fi - ri).abs() > 1e-9 || (fj - rj).abs() > 1e-9 {
            return None;
        }
        if ri < 0.0 || rj < 0.0 || ri as usize >= self.nx || rj as usize >= self.ny {
            return None;
        }
        Some((ri as usize, rj as usize))
    }

    /// Same spacing and x-range, y-range reflected through y = 0.
    pub fn mirrored_y(&self) -> Self {
        Self { y_min: -self.y_max, y_max: -self.y_min, ..*self }
    }

    /// Grid with half the spacing over the same ranges.
    pub fn refined(&self) -> Self {
        Self {
            nx: 2 * self.nx - 1,
            ny: 2 * self.ny - 1,
            h: self.h / 2.0,
            ..*self
        }
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && (self.h - other.h).abs() <= SPACING_RTOL * self.h
            && (self.x_min - other.x_min).abs() <= 1e-9 * self.h
            && (self.y_min - other.y_min).abs() <= 1e-9 * self.h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_and_unequal_grids() {
        assert!(GridSpec::new((0.0, 1.0), (0.0, 1.0), 8, 9).is_err());
        assert!(GridSpec::new((0.0, 1.0), (0.0, 2.0), 9, 9).is_err());
        let g = GridSpec::new((-1.0, 1.0), (0.0, 1.0), 17, 9).unwrap();
        assert_eq!(g.h, 0.125);
    }

    #[test]
    fn spacing_constructor_and_refinement() {
        let g = GridSpec::with_spacing((-1.0, 1.0), (0.0, 1.0), 1.0 / 16.0).unwrap();
        assert_eq!((g.nx, g.ny), (33, 17));
        let f = g.refined();
        assert_eq!((f.nx, f.ny), (65, 33));
        assert_eq!(f.x(f.nx - 1), 1.0);
        assert_eq!(g.node_at(0.0, 0.5), Some((16, 8)));
        assert_eq!(g.node_at(0.01, 0.5), None);
        let m = g.mirrored_y();
        assert_eq!((m.y_min, m.y_max), (-1.0, 0.0));
    }
}
