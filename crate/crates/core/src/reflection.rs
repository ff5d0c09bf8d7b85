//! Extension of a solution clamped on `{y = 0}` to the lower half by
//! `w(x,y) = −[u(x,−y) + 2y·u_y(x,−y) + y²·Δu(x,−y)]`, the reflected source
//! `F₁`, the singular part `H` and the trace identities behind its
//! integrability.

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{bilaplacian, derive_with, Accuracy, GridSpec, Mask, ScalarField};
use crate::poly::Poly;

/// Default clamped-trace tolerance relative to `‖u‖∞`.
pub const CLAMP_RTOL: f64 = 1e-6;

/// `u` on an upper grid starting at `y = 0`, `w` on the mirrored lower grid
/// (rows in increasing `y`, so lower row `k` mirrors upper row `ny−1−k`) and
/// the assembled extension on the symmetric grid.
#[derive(Debug, Clone)]
pub struct ReflectedExtension {
    pub u: ScalarField,
    pub w: ScalarField,
    pub full: ScalarField,
}

fn mirror_rows(upper: &ScalarField, f: impl Fn(usize, usize, f64) -> f64) -> ScalarField {
    let g = upper.grid();
    let lower = g.mirrored_y();
    let ny = g.ny;
    let values = Array2::from_shape_fn(lower.shape(), |(k, i)| {
        let j = ny - 1 - k;
        f(i, j, g.y(j))
    });
    let mask = Array2::from_shape_fn(lower.shape(), |(k, i)| upper.mask().get(i, ny - 1 - k));
    ScalarField::from_parts(lower, values, Mask::from_array(mask))
}

fn check_upper(g: &GridSpec) -> Result<()> {
    if g.y_min.abs() > 1e-9 * g.h {
        return Err(Error::usage(format!("upper grid must start at y = 0, starts at {}", g.y_min)));
    }
    Ok(())
}

/// Max of `|u(x,0)|` and of the one-sided `|u_y(x,0)|`.
pub fn clamped_traces(u: &ScalarField) -> Result<(f64, f64)> {
    check_upper(u.grid())?;
    let uy = derive_with(u, (0, 1), Accuracy::Fourth)?;
    let nx = u.grid().nx;
    let pick = |f: &ScalarField| {
        (0..nx).filter(|&i| f.mask().get(i, 0)).map(|i| f.at(i, 0).abs()).fold(0.0, f64::max)
    };
    Ok((pick(u), pick(&uy)))
}

pub fn extend(u: &ScalarField) -> Result<ReflectedExtension> {
    extend_with_tol(u, CLAMP_RTOL * u.max_abs())
}

pub fn extend_with_tol(u: &ScalarField, tol: f64) -> Result<ReflectedExtension> {
    let (value, slope) = clamped_traces(u)?;
    if value > tol || slope > tol {
        return Err(Error::NotClamped { value, slope, tol });
    }
    let uy = derive_with(u, (0, 1), Accuracy::Fourth)?;
    let lap = derive_with(u, (2, 0), Accuracy::Fourth)?.add(&derive_with(u, (0, 2), Accuracy::Fourth)?)?;
    // at the mirror row y = −y_j
    let w = mirror_rows(u, |i, j, yj| -(u.at(i, j) - 2.0 * yj * uy.at(i, j) + yj * yj * lap.at(i, j)));
    let full = assemble_full(u, &w)?;
    Ok(ReflectedExtension { u: u.clone(), w, full })
}

fn assemble_full(u: &ScalarField, w: &ScalarField) -> Result<ScalarField> {
    let g = u.grid();
    let ny = g.ny;
    let full_grid = GridSpec::with_spacing((g.x_min, g.x_max), (-g.y_max, g.y_max), g.h)?;
    let mut values = Array2::zeros(full_grid.shape());
    let mut mask = Array2::from_elem(full_grid.shape(), false);
    for k in 0..full_grid.ny {
        for i in 0..g.nx {
            let (v, m) = if k + 1 < ny {
                (w.at(i, k), w.mask().get(i, k))
            } else {
                let j = k + 1 - ny;
                (u.at(i, j), u.mask().get(i, j))
            };
            values[(k, i)] = v;
            mask[(k, i)] = m;
        }
    }
    Ok(ScalarField::from_parts(full_grid, values, Mask::from_array(mask)))
}

/// `F₁(x,y) = −[5F(x,−y) − 6y·F_y(x,−y) + y²·ΔF(x,−y)]` on the lower grid.
pub fn f1_of(f: &ScalarField) -> Result<ScalarField> {
    check_upper(f.grid())?;
    let fy = derive_with(f, (0, 1), Accuracy::Fourth)?;
    let lap = derive_with(f, (2, 0), Accuracy::Fourth)?.add(&derive_with(f, (0, 2), Accuracy::Fourth)?)?;
    Ok(mirror_rows(f, |i, j, yj| -(5.0 * f.at(i, j) + 6.0 * yj * fy.at(i, j) + yj * yj * lap.at(i, j))))
}

/// Lower-half nodes four cells inside the mask, away from every one-sided
/// stencil of the pipeline.
pub fn identity_region(ext: &ReflectedExtension) -> Mask {
    ext.w.mask().erode(4)
}

/// Componentwise `Δ²w − F₁` with `F := Δ²u`, restricted to
/// [`identity_region`].
pub fn reflection_identity_defect(ext: &ReflectedExtension) -> Result<(ScalarField, ScalarField)> {
    let f = bilaplacian(&ext.u)?;
    let f1 = f1_of(&f)?;
    let lhs = bilaplacian(&ext.w)?;
    let region = identity_region(ext);
    let defect = lhs.sub(&f1)?;
    Ok((
        ScalarField::from_parts(*defect.grid(), defect.values().clone(), region.clone()),
        ScalarField::from_parts(*f1.grid(), f1.values().clone(), region),
    ))
}

/// `max |Δ²w − F₁|` over [`identity_region`].
pub fn reflection_identity_residual(ext: &ReflectedExtension) -> Result<f64> {
    let (d, _) = reflection_identity_defect(ext)?;
    Ok(d.max_abs_on(Some(d.mask())))
}

/// Residual divided by `max(‖F₁‖∞, 1)` on the same region.
pub fn reflection_identity_relative(ext: &ReflectedExtension) -> Result<f64> {
    let (d, f1) = reflection_identity_defect(ext)?;
    Ok(d.max_abs_on(Some(d.mask())) / f1.max_abs_on(Some(f1.mask())).max(1.0))
}

/// Singular part on the lower grid; rows with `|y| < 2h` are masked out and
/// listed in `excluded_rows`.
#[derive(Debug, Clone)]
pub struct SingularPart {
    pub h: ScalarField,
    pub excluded_rows: Vec<usize>,
}

struct HParts {
    wyx: ScalarField,
    wyy: ScalarField,
    uyx: ScalarField,
    uyy: ScalarField,
    uxx: ScalarField,
}

fn h_parts(ext: &ReflectedExtension) -> Result<HParts> {
    let acc = Accuracy::Fourth;
    Ok(HParts {
        wyx: derive_with(&ext.w, (1, 1), acc)?,
        wyy: derive_with(&ext.w, (0, 2), acc)?,
        uyx: derive_with(&ext.u, (1, 1), acc)?,
        uyy: derive_with(&ext.u, (0, 2), acc)?,
        uxx: derive_with(&ext.u, (2, 0), acc)?,
    })
}

fn h_value(p: &HParts, a: &[ScalarField; 2], ny: usize, i: usize, k: usize, y: f64) -> f64 {
    let j = ny - 1 - k;
    let (a1, a2) = (a[0].at(i, k), a[1].at(i, k));
    6.0 * a1 / y * (p.wyx.at(i, k) + p.uyx.at(i, j)) + 6.0 * a2 / y * (-p.wyy.at(i, k) + p.uyy.at(i, j))
        - 12.0 * a2 / y * p.uxx.at(i, j)
}

fn check_drift(ext: &ReflectedExtension, a: &[ScalarField; 2]) -> Result<()> {
    if a.iter().any(|c| !c.grid().same_as(ext.w.grid())) {
        return Err(Error::ShapeMismatch("drift must live on the lower grid".into()));
    }
    Ok(())
}

pub fn h_of(ext: &ReflectedExtension, a: &[ScalarField; 2]) -> Result<SingularPart> {
    check_drift(ext, a)?;
    let p = h_parts(ext)?;
    let g = *ext.w.grid();
    let ny = g.ny;
    let excluded_rows: Vec<usize> = (0..ny).filter(|&k| g.y(k).abs() < 2.0 * g.h * (1.0 - 1e-9)).collect();
    let values = Array2::from_shape_fn(g.shape(), |(k, i)| {
        if excluded_rows.contains(&k) { 0.0 } else { h_value(&p, a, ny, i, k, g.y(k)) }
    });
    let mask = Array2::from_shape_fn(g.shape(), |(k, i)| ext.w.mask().get(i, k) && !excluded_rows.contains(&k));
    Ok(SingularPart { h: ScalarField::from_parts(g, values, Mask::from_array(mask)), excluded_rows })
}

/// One row of `H`; rows within `2h` of `y = 0` are rejected.
pub fn h_row(ext: &ReflectedExtension, a: &[ScalarField; 2], row: usize) -> Result<Vec<f64>> {
    check_drift(ext, a)?;
    let g = *ext.w.grid();
    if row >= g.ny {
        return Err(Error::usage(format!("row {row} outside lower grid of {} rows", g.ny)));
    }
    let y = g.y(row);
    if y.abs() < 2.0 * g.h * (1.0 - 1e-9) {
        return Err(Error::SingularRow { row });
    }
    let p = h_parts(ext)?;
    Ok((0..g.nx).map(|i| h_value(&p, a, g.ny, i, row, y)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceResiduals {
    /// `max |w_yx + u_yx|` at `y = 0`.
    pub mixed: f64,
    /// `max |−w_yy + u_yy|` at `y = 0`.
    pub normal: f64,
    /// `max |u_xx|` at `y = 0`.
    pub tangential: f64,
}

impl TraceResiduals {
    pub fn max(&self) -> f64 {
        self.mixed.max(self.normal).max(self.tangential)
    }
}

/// Traces at `y = 0` by fourth-order one-sided stencils from each side.
pub fn trace_residuals(ext: &ReflectedExtension) -> Result<TraceResiduals> {
    let acc = Accuracy::Fourth;
    let top = ext.w.grid().ny - 1;
    let wyx = derive_with(&ext.w, (1, 1), acc)?;
    let wyy = derive_with(&ext.w, (0, 2), acc)?;
    let uyx = derive_with(&ext.u, (1, 1), acc)?;
    let uyy = derive_with(&ext.u, (0, 2), acc)?;
    let uxx = derive_with(&ext.u, (2, 0), acc)?;
    let mut r = TraceResiduals { mixed: 0.0, normal: 0.0, tangential: 0.0 };
    for i in 0..ext.u.grid().nx {
        if !(ext.u.mask().get(i, 0) && ext.w.mask().get(i, top)) {
            continue;
        }
        r.mixed = r.mixed.max((wyx.at(i, top) + uyx.at(i, 0)).abs());
        r.normal = r.normal.max((-wyy.at(i, top) + uyy.at(i, 0)).abs());
        r.tangential = r.tangential.max(uxx.at(i, 0).abs());
    }
    Ok(r)
}

/// Jumps of the extension and of its normal derivative across `y = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JumpReport {
    pub value: f64,
    pub slope: f64,
}

pub fn jumps(ext: &ReflectedExtension) -> Result<JumpReport> {
    let acc = Accuracy::Fourth;
    let top = ext.w.grid().ny - 1;
    let wy = derive_with(&ext.w, (0, 1), acc)?;
    let uy = derive_with(&ext.u, (0, 1), acc)?;
    let mut r = JumpReport { value: 0.0, slope: 0.0 };
    for i in 0..ext.u.grid().nx {
        if ext.u.mask().get(i, 0) && ext.w.mask().get(i, top) {
            r.value = r.value.max((ext.w.at(i, top) - ext.u.at(i, 0)).abs());
            r.slope = r.slope.max((wy.at(i, top) - uy.at(i, 0)).abs());
        }
    }
    Ok(r)
}

/// Exact counterparts on polynomials.
pub mod symbolic {
    use super::Poly;

    pub fn extend(u: &Poly) -> Poly {
        let y = Poly::y();
        let uy = u.dy().mirror_y();
        let lap = u.laplacian().mirror_y();
        -&(&(&u.mirror_y() + &(&y.scale_int(2) * &uy)) + &(&(&y * &y) * &lap))
    }

    pub fn f1(f: &Poly) -> Poly {
        let y = Poly::y();
        let fy = f.dy().mirror_y();
        let lap = f.laplacian().mirror_y();
        -&(&(&f.mirror_y().scale_int(5) - &(&y.scale_int(6) * &fy)) + &(&(&y * &y) * &lap))
    }

    /// `Δ²w − F₁` with `F = Δ²u`; the zero polynomial when the identity
    /// holds.
    pub fn identity_gap(u: &Poly) -> Poly {
        &extend(u).bilaplacian() - &f1(&u.bilaplacian())
    }

    /// `H` multiplied by `y`, for constant drift `(a1, a2)`.
    pub fn h_times_y(u: &Poly, a1: i64, a2: i64) -> Poly {
        let w = extend(u);
        let first = &w.dy().dx() + &u.dy().dx().mirror_y();
        let second = &(-&w.dy().dy()) + &u.dy().dy().mirror_y();
        let third = u.dx().dx().mirror_y();
        &(&first.scale_int(6 * a1) + &second.scale_int(6 * a2)) - &third.scale_int(12 * a2)
    }
}
