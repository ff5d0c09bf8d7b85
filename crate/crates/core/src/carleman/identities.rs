//! Exact identities behind the Carleman estimate for `Δ`: the conjugated
//! operator split, the `θ`-commutator term, and three weighted
//! integration-by-parts formulas on the plane.

use serde::{Deserialize, Serialize};

use super::cylinder::CylinderField;
use super::weight::CarlemanWeight;
use crate::error::{Error, Result};
use crate::field::{derive, laplacian, GridSpec, Mask, QuadratureWeights, Region, ScalarField};

/// Rows at each t end that must vanish for the cylinder checks.
pub const SUPPORT_MARGIN: usize = 4;

#[derive(Debug, Clone)]
pub struct ConjugateSplit {
    pub l_tau: CylinderField,
    pub a_tau: CylinderField,
    pub s_tau: CylinderField,
    /// `max |L_τ f − (A_τ f + S_τ f)|`
    pub residual: f64,
}

/// `L_τ f = e^{−τφ} L(e^{τφ} f)` by finite differences, against
/// `A_τ f = τφ″f + 2τφ′f′` and `S_τ f = τ²φ′²f + f″ + f_θθ`.
pub fn conjugate_split(f: &CylinderField, tau: f64, w: &CarlemanWeight) -> Result<ConjugateSplit> {
    f.check_support(SUPPORT_MARGIN)?;
    let conj = f.map_indexed(|t, _, v| (tau * w.phi_t(t)).exp() * v);
    let l_tau = conj.cylinder_laplacian().map_indexed(|t, _, v| (-tau * w.phi_t(t)).exp() * v);
    let ft = f.dt();
    let g = *f.grid();
    let a_tau = CylinderField::from_index_fn(&g, |i, k| {
        let t = g.t(i);
        tau * w.ddphi(t) * f.at(i, k) + 2.0 * tau * w.dphi(t) * ft.at(i, k)
    });
    let s_tau = f
        .map_indexed(|t, _, v| tau * tau * w.dphi(t).powi(2) * v)
        .add(&f.dtt())
        .add(&f.dthetatheta());
    let residual = l_tau.sub(&a_tau.add(&s_tau)).max_abs();
    Ok(ConjugateSplit { l_tau, a_tau, s_tau, residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `|lhs − rhs| / max(|lhs|, |rhs|)`, zero when both vanish.
    pub relative_gap: f64,
}

impl IdentityCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs());
        let relative_gap = if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale };
        Self { lhs, rhs, relative_gap }
    }
}

/// `2∫γ(τφ″f + 2τφ′f′) f_θθ` against `2ετ∫ e^{εt}/(1+e^{εt}) f_θ²`, both
/// over `dt dθ`.
pub fn commutator_i1_check(f: &CylinderField, tau: f64, w: &CarlemanWeight) -> Result<IdentityCheck> {
    f.check_support(SUPPORT_MARGIN)?;
    let g = *f.grid();
    let ft = f.dt();
    let fth = f.dtheta();
    let ftt = f.dthetatheta();
    let eps = w.epsilon();
    let lhs = CylinderField::from_index_fn(&g, |i, k| {
        let t = g.t(i);
        2.0 * w.gamma(t) * (tau * w.ddphi(t) * f.at(i, k) + 2.0 * tau * w.dphi(t) * ft.at(i, k)) * ftt.at(i, k)
    });
    let rhs = CylinderField::from_index_fn(&g, |i, k| {
        let e = (eps * g.t(i)).exp();
        2.0 * eps * tau * e / (1.0 + e) * fth.at(i, k).powi(2)
    });
    Ok(IdentityCheck::new(lhs.integrate(), rhs.integrate()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IbpIdentity {
    /// `∫ζuΔu = −∫(ζ|∇u|² + (∇u·∇ζ)u)`
    First,
    /// `∫ζΣ|∂_jk u|² = ∫(−D²ζ∇u·∇u + Δζ|∇u|² + ζ(Δu)²)`
    Second,
    /// `∫ζΣ|∂_ijk u|² = −∫ζΔuΔ²u + ∫(−tr(D²u D²ζ D²u) + Δζ|D²u|² + ½Δζ(Δu)²)`
    Third,
}

impl IbpIdentity {
    pub fn from_index(which: u8) -> Result<Self> {
        match which {
            1 => Ok(Self::First),
            2 => Ok(Self::Second),
            3 => Ok(Self::Third),
            _ => Err(Error::usage(format!("identity index must be 1, 2 or 3, got {which}"))),
        }
    }
}

/// Cells of margin between the support of `u` and the edge of `ζ`'s domain.
pub const IBP_MARGIN: usize = 3;

/// Both sides by finite differences and node quadrature over the common
/// mask.
pub fn ibp_identity_check(zeta: &ScalarField, u: &ScalarField, which: IbpIdentity) -> Result<IdentityCheck> {
    if !zeta.grid().same_as(u.grid()) {
        return Err(Error::ShapeMismatch("zeta and u grids differ".into()));
    }
    let g = *u.grid();
    let domain = zeta.mask().and(u.mask());
    let inner = domain.erode(IBP_MARGIN);
    let scale = u.max_abs();
    for ((j, i), v) in u.values().indexed_iter() {
        if !inner.get(i, j) && v.abs() > 1e-14 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::SupportViolation(format!(
                "u = {v:e} at node ({i}, {j}) within {IBP_MARGIN} cells of the domain edge"
            )));
        }
    }
    let zeta = zeta.clone().with_mask(domain.clone())?;
    let u = u.clone().with_mask(domain.clone())?;
    let q = Region::Nodes(domain).weights(&g);
    let d = |f: &ScalarField, o| derive(f, o);
    let (ux, uy) = (d(&u, (1, 0))?, d(&u, (0, 1))?);
    let (zx, zy) = (d(&zeta, (1, 0))?, d(&zeta, (0, 1))?);
    let lap_u = laplacian(&u)?;
    let lap_z = laplacian(&zeta)?;
    let grad2 = |a: &ScalarField, b: &ScalarField| a.mul(a).and_then(|x| x.add(&b.mul(b)?));
    let (lhs, rhs) = match which {
        IbpIdentity::First => {
            let lhs = zeta.mul(&u)?.mul(&lap_u)?;
            let dot = ux.mul(&zx)?.add(&uy.mul(&zy)?)?;
            let rhs = zeta.mul(&grad2(&ux, &uy)?)?.add(&dot.mul(&u)?)?.scale(-1.0);
            (lhs, rhs)
        }
        IbpIdentity::Second => {
            let (uxx, uxy, uyy) = (d(&u, (2, 0))?, d(&u, (1, 1))?, d(&u, (0, 2))?);
            let (zxx, zxy, zyy) = (d(&zeta, (2, 0))?, d(&zeta, (1, 1))?, d(&zeta, (0, 2))?);
            let hess2 = ScalarField::combine(&[(1.0, &uxx.mul(&uxx)?), (2.0, &uxy.mul(&uxy)?), (1.0, &uyy.mul(&uyy)?)])?;
            let lhs = zeta.mul(&hess2)?;
            let quad = ScalarField::combine(&[
                (1.0, &zxx.mul(&ux.mul(&ux)?)?),
                (2.0, &zxy.mul(&ux.mul(&uy)?)?),
                (1.0, &zyy.mul(&uy.mul(&uy)?)?),
            ])?;
            let rhs = ScalarField::combine(&[
                (-1.0, &quad),
                (1.0, &lap_z.mul(&grad2(&ux, &uy)?)?),
                (1.0, &zeta.mul(&lap_u.mul(&lap_u)?)?),
            ])?;
            (lhs, rhs)
        }
        IbpIdentity::Third => {
            let (uxx, uxy, uyy) = (d(&u, (2, 0))?, d(&u, (1, 1))?, d(&u, (0, 2))?);
            let (zxx, zxy, zyy) = (d(&zeta, (2, 0))?, d(&zeta, (1, 1))?, d(&zeta, (0, 2))?);
            let third = ScalarField::combine(&[
                (1.0, &d(&u, (3, 0))?.map(|v| v * v)),
                (3.0, &d(&u, (2, 1))?.map(|v| v * v)),
                (3.0, &d(&u, (1, 2))?.map(|v| v * v)),
                (1.0, &d(&u, (0, 3))?.map(|v| v * v)),
            ])?;
            let lhs = zeta.mul(&third)?;
            let bilap = crate::field::bilaplacian(&u)?;
            // (D²u)² entries for symmetric D²u = [[a, b], [b, c]]
            let sq11 = uxx.mul(&uxx)?.add(&uxy.mul(&uxy)?)?;
            let sq12 = uxy.mul(&uxx.add(&uyy)?)?;
            let sq22 = uxy.mul(&uxy)?.add(&uyy.mul(&uyy)?)?;
            let trace = ScalarField::combine(&[(1.0, &zxx.mul(&sq11)?), (2.0, &zxy.mul(&sq12)?), (1.0, &zyy.mul(&sq22)?)])?;
            let hess2 = ScalarField::combine(&[(1.0, &uxx.mul(&uxx)?), (2.0, &uxy.mul(&uxy)?), (1.0, &uyy.mul(&uyy)?)])?;
            let rhs = ScalarField::combine(&[
                (-1.0, &zeta.mul(&lap_u)?.mul(&bilap)?),
                (-1.0, &trace),
                (1.0, &lap_z.mul(&hess2)?),
                (0.5, &lap_z.mul(&lap_u.mul(&lap_u)?)?),
            ])?;
            (lhs, rhs)
        }
    };
    Ok(IdentityCheck::new(integrate_on(&lhs, &q)?, integrate_on(&rhs, &q)?))
}

fn integrate_on(f: &ScalarField, q: &QuadratureWeights) -> Result<f64> {
    crate::field::integrate(f, q)
}

/// Mask of nodes with `|x| > radius`, for weights singular at the origin.
pub fn punctured_mask(grid: &GridSpec, radius: f64) -> Mask {
    Mask::from_fn(grid, |x, y| x.hypot(y) > radius)
}
