use crate::error::Result;
use crate::field::{GridSpec, ScalarField};
use crate::plate::PlateMaterial;
use crate::solver::{assemble, solve, BoundaryData, ClampedBVP};

pub const REFERENCE_NU: f64 = 0.3;

/// `y eˣ sin y`, biharmonic and clamped on `y = 0`.
pub fn reference_exact(x: f64, y: f64) -> (f64, f64, f64) {
    let (s, c) = y.sin_cos();
    let e = x.exp();
    (y * e * s, y * e * s, e * (s + y * c))
}

/// Finite-difference solution of the homogeneous constant-stiffness plate on
/// `[−L, L] × [0, L]` with clamped bottom and the reference function's
/// data on the other sides.
pub fn reference_solution(half_width: f64, h: f64) -> Result<ScalarField> {
    let grid = GridSpec::with_spacing((-half_width, half_width), (0.0, half_width), h)?;
    let data = BoundaryData::from_fns(&grid, |x, y| reference_exact(x, y).0, |x, y| reference_exact(x, y).1, |x, y| {
        reference_exact(x, y).2
    });
    let bvp = ClampedBVP::new(PlateMaterial::constant(&grid, 1.0, REFERENCE_NU)?, data, ScalarField::zeros(&grid))?;
    Ok(solve(&assemble(&bvp)?)?.0)
}
