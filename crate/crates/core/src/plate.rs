//! Material law and the Kirchhoff–Love plate operator in divergence and
//! non-divergence form.
//!
//! With `K = B(1−ν)` and `G = νB` the divergence form expands to
//!
//! ```text
//! div div(K∇²v + GΔv I) = B Δ²v + 2∇B·∇Δv
//!                         + (K_xx + ΔG) v_xx + 2K_xy v_xy + (K_yy + ΔG) v_yy
//! ```
//!
//! so dividing by `B` gives `Δ²v − ã·∇Δv − q̃₂(v)` with `ã = −2∇B/B` and
//! `q̃₂ = c20 ∂xx + c11 ∂xy + c02 ∂yy`, `c20 = −(K_xx+ΔG)/B`,
//! `c11 = −2K_xy/B`, `c02 = −(K_yy+ΔG)/B` ([`Q2Convention::Expanded`]).
//! Pairing each `∂ij` of the coefficient `K + Gδij` with the same `∂ij` of
//! `v` instead ([`Q2Convention::Literal`]) replaces `ΔG` by `G_xx`, resp.
//! `G_yy`; the two agree only when `G_xx = G_yy = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{bilaplacian, derive, gradient, laplacian, Mask, ScalarField};

/// Lamé moduli, plate thickness and the claimed structural constants.
#[derive(Debug, Clone)]
pub struct LameField {
    pub lambda: ScalarField,
    pub mu: ScalarField,
    pub thickness: f64,
    pub alpha0: f64,
    pub gamma0: f64,
    /// Claimed C⁴ bound on the moduli; recorded, checked only by sampling.
    pub lambda0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub pass: bool,
    /// `min μ − α0`
    pub mu_margin: f64,
    /// `min(2μ + 3λ) − γ0`
    pub gamma_margin: f64,
    pub worst_mu_at: (f64, f64),
    pub worst_gamma_at: (f64, f64),
}

pub fn check_strong_convexity(lame: &LameField) -> ConvexityReport {
    let g = lame.mu.grid();
    let mask = lame.mu.mask().and(lame.lambda.mask());
    let mut mu_min = (f64::INFINITY, (0.0, 0.0));
    let mut gm_min = (f64::INFINITY, (0.0, 0.0));
    for j in 0..g.ny {
        for i in 0..g.nx {
            if !mask.get(i, j) {
                continue;
            }
            let (m, l) = (lame.mu.at(i, j), lame.lambda.at(i, j));
            let p = (g.x(i), g.y(j));
            if m < mu_min.0 {
                mu_min = (m, p);
            }
            if 2.0 * m + 3.0 * l < gm_min.0 {
                gm_min = (2.0 * m + 3.0 * l, p);
            }
        }
    }
    let mu_margin = mu_min.0 - lame.alpha0;
    let gamma_margin = gm_min.0 - lame.gamma0;
    ConvexityReport {
        pass: mu_margin >= 0.0 && gamma_margin >= 0.0,
        mu_margin,
        gamma_margin,
        worst_mu_at: mu_min.1,
        worst_gamma_at: gm_min.1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Q2Convention {
    /// Exact expansion of the divergence form (default).
    #[default]
    Expanded,
    /// Same-index pairing `−(1/B) Σ ∂ij(K + Gδij) ∂ij v`.
    Literal,
}

/// Coefficients of `q̃₂ = c20 ∂xx + c11 ∂xy + c02 ∂yy`.
#[derive(Debug, Clone)]
pub struct Q2Coefficients {
    pub c20: ScalarField,
    pub c11: ScalarField,
    pub c02: ScalarField,
}

impl Q2Coefficients {
    pub fn apply(&self, v: &ScalarField) -> Result<ScalarField> {
        let vxx = derive(v, (2, 0))?;
        let vxy = derive(v, (1, 1))?;
        let vyy = derive(v, (0, 2))?;
        self.c20.mul(&vxx)?.add(&self.c11.mul(&vxy)?)?.add(&self.c02.mul(&vyy)?)
    }
}

#[derive(Debug, Clone)]
pub struct PlateMaterial {
    pub young: ScalarField,
    pub poisson: ScalarField,
    pub stiffness: ScalarField,
    /// `ã = −2∇B/B`
    pub drift: [ScalarField; 2],
    pub q2: Q2Coefficients,
    pub convention: Q2Convention,
}

pub fn derive_material(lame: &LameField) -> Result<PlateMaterial> {
    derive_material_with(lame, Q2Convention::default())
}

pub fn derive_material_with(lame: &LameField, convention: Q2Convention) -> Result<PlateMaterial> {
    lame.mu.check_same_grid(&lame.lambda)?;
    let g = *lame.mu.grid();
    let mask = lame.mu.mask().and(lame.lambda.mask());
    for j in 0..g.ny {
        for i in 0..g.nx {
            let s = lame.mu.at(i, j) + lame.lambda.at(i, j);
            if mask.get(i, j) && s <= 0.0 {
                return Err(Error::MaterialDenominator { x: g.x(i), y: g.y(j), value: s });
            }
        }
    }
    let report = check_strong_convexity(lame);
    if !report.pass {
        let at = if report.mu_margin < 0.0 { report.worst_mu_at } else { report.worst_gamma_at };
        return Err(Error::StrongConvexityViolated {
            mu_margin: report.mu_margin,
            gamma_margin: report.gamma_margin,
            x: at.0,
            y: at.1,
        });
    }
    let young = lame.mu.zip_with(&lame.lambda, |m, l| m * (2.0 * m + 3.0 * l) / (m + l))?;
    let poisson = lame.mu.zip_with(&lame.lambda, |m, l| l / (2.0 * (m + l)))?;
    let h3 = lame.thickness.powi(3);
    let stiffness = young.zip_with(&poisson, |e, n| h3 / 12.0 * e / (1.0 - n * n))?;
    let mut mat = PlateMaterial::from_stiffness(&stiffness, &poisson, convention)?;
    mat.young = young;
    Ok(mat)
}

impl PlateMaterial {
    /// Material from stiffness and Poisson fields; `young` is reported for
    /// unit thickness.
    pub fn from_stiffness(b: &ScalarField, nu: &ScalarField, convention: Q2Convention) -> Result<Self> {
        b.check_same_grid(nu)?;
        let g = *b.grid();
        if let Some(((j, i), v)) = b.values().indexed_iter().find(|&((j, i), v)| b.mask().get(i, j) && *v <= 0.0) {
            return Err(Error::AssemblyDegenerate(format!(
                "nonpositive stiffness {v} at ({}, {})",
                g.x(i),
                g.y(j)
            )));
        }
        let [bx, by] = gradient(b)?;
        let drift = [
            bx.zip_with(b, |d, bb| -2.0 * d / bb)?,
            by.zip_with(b, |d, bb| -2.0 * d / bb)?,
        ];
        let k = b.zip_with(nu, |bb, n| bb * (1.0 - n))?;
        let gg = b.zip_with(nu, |bb, n| bb * n)?;
        let kxx = derive(&k, (2, 0))?;
        let kxy = derive(&k, (1, 1))?;
        let kyy = derive(&k, (0, 2))?;
        let gxx = derive(&gg, (2, 0))?;
        let gyy = derive(&gg, (0, 2))?;
        let (ax, ay) = match convention {
            Q2Convention::Expanded => {
                let lap = gxx.add(&gyy)?;
                (lap.clone(), lap)
            }
            Q2Convention::Literal => (gxx, gyy),
        };
        let c20 = kxx.add(&ax)?.zip_with(b, |s, bb| -s / bb)?;
        let c02 = kyy.add(&ay)?.zip_with(b, |s, bb| -s / bb)?;
        let c11 = kxy.zip_with(b, |s, bb| -2.0 * s / bb)?;
        let young = b.zip_with(nu, |bb, n| 12.0 * bb * (1.0 - n * n))?;
        Ok(Self { young, poisson: nu.clone(), stiffness: b.clone(), drift, q2: Q2Coefficients { c20, c11, c02 }, convention })
    }

    pub fn constant(grid: &crate::field::GridSpec, b: f64, nu: f64) -> Result<Self> {
        Self::from_stiffness(&ScalarField::constant(grid, b), &ScalarField::constant(grid, nu), Q2Convention::Expanded)
    }

    /// `ã·∇w` for a field `w`.
    pub fn drift_dot_grad(&self, w: &ScalarField) -> Result<ScalarField> {
        let [wx, wy] = gradient(w)?;
        self.drift[0].mul(&wx)?.add(&self.drift[1].mul(&wy)?)
    }
}

/// `div div(B(1−ν)∇²v + BνΔv I)` by two nested divergences of the moment
/// tensor.
pub fn apply_l_div(mat: &PlateMaterial, v: &ScalarField) -> Result<ScalarField> {
    let b = &mat.stiffness;
    let k = b.zip_with(&mat.poisson, |bb, n| bb * (1.0 - n))?;
    let gg = b.zip_with(&mat.poisson, |bb, n| bb * n)?;
    let vxx = derive(v, (2, 0))?;
    let vxy = derive(v, (1, 1))?;
    let vyy = derive(v, (0, 2))?;
    let lap = vxx.add(&vyy)?;
    let glap = gg.mul(&lap)?;
    let m11 = k.mul(&vxx)?.add(&glap)?;
    let m12 = k.mul(&vxy)?;
    let m22 = k.mul(&vyy)?.add(&glap)?;
    let d1 = derive(&m11, (1, 0))?.add(&derive(&m12, (0, 1))?)?;
    let d2 = derive(&m12, (1, 0))?.add(&derive(&m22, (0, 1))?)?;
    derive(&d1, (1, 0))?.add(&derive(&d2, (0, 1))?)
}

/// `Δ²v − ã·∇Δv − q̃₂(v)`.
pub fn apply_l_nondiv(mat: &PlateMaterial, v: &ScalarField) -> Result<ScalarField> {
    let bi = bilaplacian(v)?;
    let drift = mat.drift_dot_grad(&laplacian(v)?)?;
    let q2 = mat.q2.apply(v)?;
    bi.sub(&drift)?.sub(&q2)
}

/// Nodes used by the form-equivalence residual: four cells inside the mask.
pub fn residual_region(mask: &Mask) -> Mask {
    mask.erode(4)
}

/// `max |apply_l_div(v)/B − apply_l_nondiv(v)|` over [`residual_region`].
pub fn form_equivalence_residual(mat: &PlateMaterial, v: &ScalarField) -> Result<f64> {
    let div = apply_l_div(mat, v)?.zip_with(&mat.stiffness, |d, b| d / b)?;
    let nondiv = apply_l_nondiv(mat, v)?;
    let region = residual_region(v.mask());
    Ok(div.sub(&nondiv)?.max_abs_on(Some(&region)))
}
