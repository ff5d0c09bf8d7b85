use serde::{Deserialize, Serialize};

use super::scan::half_ball_mass;
use crate::carleman::{CarlemanWeight, TAU_BAR};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::field::{all_of_order, tensor_norm_sq, weighted_integrate_log, Half, LogValue, Region, ScalarField};
use crate::reflection::extend_with_tol;

/// Relative clamping tolerance for solver output passed to the audit.
pub const AUDIT_CLAMP_RTOL: f64 = 1e-3;

/// `τ₀ = τ̄ + log₄(4 C M̄₁² N̄ / R̄₀)`.
pub fn tau0_select(tau_bar: f64, c: f64, m1_bar: f64, n_bar: f64, r0_bar: f64) -> Result<f64> {
    for (name, v) in [("tau_bar", tau_bar), ("C", c), ("M1bar", m1_bar), ("Nbar", n_bar), ("R0bar", r0_bar)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::usage(format!("tau0_select needs {name} > 0, got {v}")));
        }
    }
    Ok(tau_bar + (4.0 * c * m1_bar * m1_bar * n_bar / r0_bar).ln() / 4f64.ln())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaParams {
    pub r: f64,
    pub big_r: f64,
    pub r0_bar: f64,
    pub taus: Vec<f64>,
}

impl LemmaParams {
    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < 2.0 * self.r && 2.0 * self.r < self.big_r && self.big_r < self.r0_bar / 2.0;
        if !ok {
            return Err(Error::LemmaScaleOrder { r: self.r, big_r: self.big_r, r0bar: self.r0_bar });
        }
        if self.taus.is_empty() || self.taus.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::usage("lemma audit needs a nonempty grid of positive τ"));
        }
        Ok(())
    }
}

/// Terms of the audited inequality at one τ, in log space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaRow {
    pub tau: f64,
    /// `R (2r)^{−2τ} ∫_{B⁺_2r} u²`
    pub lhs1: LogValue,
    /// `R^{1−2τ} ∫_{B⁺_R} u²`
    pub lhs2: LogValue,
    /// `(r/4)^{−2τ} ∫_{B⁺_r} u²`
    pub rhs1: LogValue,
    /// `(R̄₀/2)^{−2τ} ∫_{B⁺_R̄₀} u²`
    pub rhs2: LogValue,
    /// Cutoff-transition integrals near `r` and near `R̄₀`.
    pub j0: LogValue,
    pub j1: LogValue,
    /// `(lhs1 + lhs2) / (rhs1 + rhs2)`
    pub c_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaAudit {
    pub params: LemmaParams,
    /// `∫_{B⁺_s} u²` for `s = r, 2r, R, R̄₀/4, R̄₀`.
    pub masses: Masses,
    pub rows: Vec<LemmaRow>,
    pub c_hat_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Masses {
    pub r: f64,
    pub two_r: f64,
    pub big_r: f64,
    pub quarter_r0_bar: f64,
    pub r0_bar: f64,
}

impl LemmaAudit {
    pub fn to_csv(&self) -> String {
        let f = crate::report::fmt_f64;
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let mut v = vec![f(r.tau)];
                v.extend([r.lhs1, r.lhs2, r.rhs1, r.rhs2, r.j0, r.j1].iter().map(|l| f(l.ln())));
                v.push(f(r.c_hat));
                v
            })
            .collect();
        crate::report::csv_table(&["tau", "ln_lhs1", "ln_lhs2", "ln_rhs1", "ln_rhs2", "ln_j0", "ln_j1", "c_hat"], &rows)
    }
}

/// `Σ_{k≤3} s^{2(k−4)} |D^k f|²`.
fn scaled_jet(f: &ScalarField, s: f64) -> Result<ScalarField> {
    let mut acc = f.mul(f)?.scale(s.powi(-8));
    for k in 1..=3 {
        let d = tensor_norm_sq(&all_of_order(f, k)?)?;
        acc = acc.add(&d.scale(s.powi(2 * (k as i32 - 4))))?;
    }
    Ok(acc)
}

/// `∫_{annulus} ρ^{8−2τ} Σ (s^{k−4}|D^k u|)²` over both halves.
fn transition_integral(jets: &(ScalarField, ScalarField), inner: f64, outer: f64, tau: f64) -> Result<LogValue> {
    let rho = CarlemanWeight::main();
    let half = |f: &ScalarField, which: Half| -> Result<LogValue> {
        let lw = rho.log_rho_field(f.grid()).map(|l| (8.0 - 2.0 * tau) * l);
        let w = Region::annulus((0.0, 0.0), inner, outer, which).weights(f.grid());
        weighted_integrate_log(f, &lw, &w)
    };
    Ok(half(&jets.0, Half::Upper)?.add(half(&jets.1, Half::Lower)?))
}

/// Evaluates every term of the audited inequality for `u` on a grid with
/// its clamped edge at `y = 0`.
pub fn lemma_terms_audit(u: &ScalarField, params: &LemmaParams, exec: Execution) -> Result<LemmaAudit> {
    params.validate()?;
    let LemmaParams { r, big_r, r0_bar, .. } = *params;
    let origin = (0.0, 0.0);
    // cells touching the weight's singular point must stay outside the
    // inner transition annulus
    let h = u.grid().h;
    if r / 4.0 <= std::f64::consts::SQRT_2 * h {
        return Err(Error::usage(format!("inner transition radius r/4 = {} is not resolved at h = {h}", r / 4.0)));
    }
    let masses = Masses {
        r: half_ball_mass(u, origin, r)?,
        two_r: half_ball_mass(u, origin, 2.0 * r)?,
        big_r: half_ball_mass(u, origin, big_r)?,
        quarter_r0_bar: half_ball_mass(u, origin, r0_bar / 4.0)?,
        r0_bar: half_ball_mass(u, origin, r0_bar)?,
    };
    let ext = extend_with_tol(u, AUDIT_CLAMP_RTOL * u.max_abs())?;
    let near = (scaled_jet(&ext.u, r)?, scaled_jet(&ext.w, r)?);
    let far = (scaled_jet(&ext.u, r0_bar)?, scaled_jet(&ext.w, r0_bar)?);
    let rows = exec
        .map(&params.taus, |&tau| -> Result<LemmaRow> {
            let (lhs1, lhs2, rhs1, rhs2) = terms_at(&masses, params, tau);
            let c_hat = lhs1.add(lhs2).div(rhs1.add(rhs2)).to_f64();
            Ok(LemmaRow {
                tau,
                lhs1,
                lhs2,
                rhs1,
                rhs2,
                j0: transition_integral(&near, r / 4.0, r / 2.0, tau)?,
                j1: transition_integral(&far, r0_bar / 2.0, 2.0 * r0_bar / 3.0, tau)?,
                c_hat,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let c_hat_max = rows.iter().map(|r| r.c_hat).fold(f64::NEG_INFINITY, f64::max);
    if !c_hat_max.is_finite() {
        return Err(Error::VanishingDenominator("lemma right-hand side vanished".into()));
    }
    Ok(LemmaAudit { params: params.clone(), masses, rows, c_hat_max })
}

fn terms_at(m: &Masses, p: &LemmaParams, tau: f64) -> (LogValue, LogValue, LogValue, LogValue) {
    let lv = |ln_scale: f64, mass: f64| LogValue::from_f64(mass).mul(LogValue::from_ln(ln_scale));
    let lhs1 = lv(p.big_r.ln() - 2.0 * tau * (2.0 * p.r).ln(), m.two_r);
    let lhs2 = lv((1.0 - 2.0 * tau) * p.big_r.ln(), m.big_r);
    let rhs1 = lv(-2.0 * tau * (p.r / 4.0).ln(), m.r);
    let rhs2 = lv(-2.0 * tau * (p.r0_bar / 2.0).ln(), m.r0_bar);
    (lhs1, lhs2, rhs1, rhs2)
}

/// End-to-end doubling chain at `R = R̄₀/4`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub r: f64,
    pub r0_bar: f64,
    pub tau_bar: f64,
    /// Empirical lemma constant, floored at 1.
    pub c_hat: f64,
    /// Carried symbolically; the audit's constant absorbs `M₁² + 1`.
    pub m1_bar: f64,
    pub n_bar: f64,
    pub tau0: f64,
    /// True when `τ₀` lies inside the audited τ range.
    pub tau0_in_range: bool,
    /// Empirical constant at `τ₀` itself.
    pub c_hat_at_tau0: f64,
    /// `R^{1−2τ₀}∫_{B⁺_R} u² ≥ Ĉ M̄₁² (R̄₀/2)^{−2τ₀}∫_{B⁺_R̄₀} u²`
    pub absorption_holds: bool,
    /// `(R̄₀/4)(2r)^{−2τ₀}∫_{B⁺_2r} u² ≤ Ĉ M̄₁² (r/4)^{−2τ₀}∫_{B⁺_r} u²`
    pub step_holds: bool,
    /// `ln Ĉ′` with `Ĉ′ = 64^{τ̄}(4ĈM̄₁²/R̄₀)⁴`.
    pub ln_c_prime: f64,
    /// `ln(Ĉ′ N̄³)`
    pub ln_bound: f64,
    /// `|ln((4ĈM̄₁²/R̄₀)·64^{τ₀}) − ln(Ĉ′N̄³)|`, zero up to rounding.
    pub form_gap: f64,
    pub measured_doubling: f64,
    pub holds: bool,
}

pub fn doubling_chain(u: &ScalarField, r: f64, r0_bar: f64, taus: &[f64], exec: Execution) -> Result<ChainReport> {
    let params = LemmaParams { r, big_r: r0_bar / 4.0, r0_bar, taus: taus.to_vec() };
    let audit = lemma_terms_audit(u, &params, exec)?;
    let m = audit.masses;
    let c_hat = audit.c_hat_max.max(1.0);
    let m1_bar = 1.0;
    let n_bar = m.r0_bar / m.quarter_r0_bar;
    if !n_bar.is_finite() || n_bar <= 0.0 {
        return Err(Error::VanishingDenominator(format!("N̄ = {n_bar}")));
    }
    let tau0 = tau0_select(TAU_BAR, c_hat, m1_bar, n_bar, r0_bar)?;
    let (lo, hi) = taus.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), t| (a.min(*t), b.max(*t)));
    let (lhs1, lhs2, rhs1, rhs2) = terms_at(&m, &params, tau0);
    let c_hat_at_tau0 = lhs1.add(lhs2).div(rhs1.add(rhs2)).to_f64();
    let k = LogValue::from_f64(c_hat * m1_bar * m1_bar);
    let absorption_holds = lhs2.ln() >= k.mul(rhs2).ln() - 1e-9;
    // with R = R̄₀/4 the first left term is exactly the step's left side
    let step_holds = lhs1.ln() <= k.mul(rhs1).ln() + 1e-9;
    let ln4 = 4f64.ln();
    let ln_base = (4.0 * c_hat * m1_bar * m1_bar / r0_bar).ln();
    let ln_c_prime = TAU_BAR * 64f64.ln() + 4.0 * ln_base;
    let ln_bound = ln_c_prime + 3.0 * n_bar.ln();
    let form_gap = (ln_base + tau0 * 3.0 * ln4 - ln_bound).abs();
    let measured_doubling = m.two_r / m.r;
    Ok(ChainReport {
        r,
        r0_bar,
        tau_bar: TAU_BAR,
        c_hat,
        m1_bar,
        n_bar,
        tau0,
        tau0_in_range: tau0 >= lo && tau0 <= hi,
        c_hat_at_tau0,
        absorption_holds,
        step_holds,
        ln_c_prime,
        ln_bound,
        form_gap,
        measured_doubling,
        holds: measured_doubling.ln() <= ln_bound,
    })
}
