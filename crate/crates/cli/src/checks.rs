//! Registry of named checks. Each entry runs a small fixed configuration
//! and reports a single value against its default tolerance.

use std::f64::consts::PI;

use platelab_core::baselines::{
    standard_lemma_params, standard_sweep, Baselines, INTERPOLATION_EPS, REFERENCE_H, REFERENCE_HALF_WIDTH,
    REVERSE_HOLDER_Q, SCAN_FACTOR, SCAN_RADII,
};
use platelab_core::carleman::{
    bilap_lhs_rhs, laplace_lhs_rhs, ratio_sweep, CarlemanWeight, DerivativeProfile, EstimateKind, TestShape,
};
use platelab_core::conformal::{build_map, certify, pullback_solution, transformed_drift, BoundaryGraph};
use platelab_core::doubling::*;
use platelab_core::field::{
    build_cutoff, derive, integrate, weighted_integrate_log, GridSpec, Half, LogValue, Region, ScalarField,
};
use platelab_core::plate::{check_strong_convexity, derive_material, form_equivalence_residual, LameField};
use platelab_core::poly::Poly;
use platelab_core::reflection::{
    extend, extend_with_tol, f1_of, h_of, reflection_identity_relative, reflection_identity_residual, symbolic,
    trace_residuals,
};
use platelab_core::solver::{convergence_study, ManufacturedCase};
use platelab_core::{Execution, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::experiments::CheckResult;
use crate::fixtures::{hardy_summary, identity_level, order};

pub struct Check {
    pub id: &'static str,
    /// What the check verifies, in words.
    pub anchor: &'static str,
    pub tolerance: &'static str,
    /// Library operations the check exercises.
    pub covers: &'static [&'static str],
    /// True when the check takes more than a few seconds.
    pub slow: bool,
    run: fn() -> Result<(bool, f64, String)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckInfo {
    pub id: &'static str,
    pub anchor: &'static str,
    pub tolerance: &'static str,
    pub covers: &'static [&'static str],
    pub slow: bool,
}

impl Check {
    pub fn info(&self) -> CheckInfo {
        CheckInfo { id: self.id, anchor: self.anchor, tolerance: self.tolerance, covers: self.covers, slow: self.slow }
    }

    pub fn run(&self) -> CheckResult {
        let (pass, value, detail) = (self.run)().unwrap_or_else(|e| (false, f64::NAN, format!("error {e}")));
        CheckResult { id: self.id.into(), pass, value, tolerance: self.tolerance.into(), detail }
    }
}

pub fn find(id: &str) -> Option<&'static Check> {
    REGISTRY.iter().find(|c| c.id == id)
}

fn upper(h: f64) -> GridSpec {
    GridSpec::with_spacing((-1.0, 1.0), (0.0, 1.0), h).expect("upper grid")
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

fn derive_commute() -> Result<(bool, f64, String)> {
    let g = GridSpec::with_spacing((-1.0, 1.0), (-1.0, 1.0), 1.0 / 32.0)?;
    let f = ScalarField::from_fn(&g, |x, y| x.powi(3) * y - 2.0 * x * x * y * y + y.powi(4) + x);
    let a = derive(&derive(&f, (1, 0))?, (0, 1))?;
    let b = derive(&f, (1, 1))?;
    let gap = a.sub(&b)?.max_abs() / b.max_abs();
    Ok((gap <= 1e-12, gap, "quartic, h = 1/32".into()))
}

fn integrate_half_disc() -> Result<(bool, f64, String)> {
    let g = GridSpec::new((-1.0, 1.0), (0.0, 1.0), 257, 129)?;
    let w = Region::disc((0.0, 0.0), 1.0, Half::Upper).weights(&g);
    let area = integrate(&ScalarField::constant(&g, 1.0), &w)?;
    let err = (area - PI / 2.0).abs();
    Ok((err < 1e-3, err, format!("area {area}")))
}

fn log_weight_shift() -> Result<(bool, f64, String)> {
    let g = upper(1.0 / 32.0);
    let w = Region::disc((0.0, 0.0), 0.8, Half::Upper).weights(&g);
    let f = ScalarField::from_fn(&g, |x, y| 1.0 + x * x + y);
    let base = integrate(&f, &w)?;
    let mut worst = 0.0_f64;
    for c in [-500.0, -37.5, 0.0, 120.0, 500.0] {
        let v = weighted_integrate_log(&f, &ScalarField::constant(&g, c), &w)?;
        worst = worst.max((v.ln() - LogValue::from_f64(base).ln() - c).abs());
    }
    Ok((worst <= 1e-10, worst, "log shift for |c| <= 500".into()))
}

fn cutoff_profile() -> Result<(bool, f64, String)> {
    let cut = build_cutoff(0.1, 0.4)?;
    let mut worst = 0.0_f64;
    for s in 0..10_000 {
        let t = 0.4 * s as f64 / 9_999.0;
        let e = cut.eta(t);
        let plateau = (0.05..=0.2).contains(&t);
        let outside = t <= 0.025 || t >= 0.4 * 2.0 / 3.0;
        worst = worst.max(if plateau { (e - 1.0).abs() } else if outside { e.abs() } else { 0.0 });
        if !(0.0..=1.0).contains(&e) {
            worst = worst.max(1.0);
        }
    }
    let ok = cut.eta(0.05) == 1.0 && cut.eta(0.2) == 1.0 && cut.eta(0.35) == 0.0;
    Ok((ok && worst == 0.0, worst, "r = 0.1, R0 = 0.4 on 10^4 samples".into()))
}

fn lame(g: &GridSpec, lambda: impl Fn(f64, f64) -> f64, mu: f64) -> LameField {
    LameField {
        lambda: ScalarField::from_fn(g, lambda),
        mu: ScalarField::constant(g, mu),
        thickness: 0.1,
        alpha0: 0.5,
        gamma0: 0.5,
        lambda0: 10.0,
    }
}

fn convexity() -> Result<(bool, f64, String)> {
    let g = upper(1.0 / 16.0);
    let good = check_strong_convexity(&lame(&g, |x, _| 1.0 + 0.2 * x, 1.0));
    let bad = check_strong_convexity(&lame(&g, |_, _| -0.5, 0.3));
    let m = derive_material(&lame(&g, |x, _| 1.0 + 0.2 * x, 1.0))?;
    let nu_max = max_of(m.poisson.values().iter().copied());
    Ok((good.pass && !bad.pass && nu_max < 0.5, nu_max, "accepts convex moduli, rejects mu below alpha0".into()))
}

fn form_equivalence() -> Result<(bool, f64, String)> {
    let residual = |n: f64| -> Result<f64> {
        let g = upper(1.0 / n);
        let m = derive_material(&lame(&g, |x, y| 1.0 + 0.3 * (x + y).sin(), 1.0))?;
        form_equivalence_residual(&m, &ScalarField::from_fn(&g, |x, y| x * x * y * y + x.sin() * y.powi(3)))
    };
    let o = order(residual(32.0)?, residual(64.0)?);
    Ok((o >= 1.8, o, "variable lambda, h = 1/32 -> 1/64".into()))
}

fn solver_order() -> Result<(bool, f64, String)> {
    let grids: Vec<GridSpec> = [16.0, 32.0, 64.0].iter().map(|n| upper(1.0 / n)).collect();
    let rows = convergence_study(ManufacturedCase::SinY2, &grids)?;
    let orders: Vec<f64> = rows.iter().filter_map(|r| r.order).collect();
    let worst = orders.iter().copied().fold(2.0_f64, |w, o| if (o - 2.0).abs() > (w - 2.0).abs() { o } else { w });
    Ok(((1.7..=2.3).contains(&worst) && orders.len() == 2, worst, format!("orders {orders:?}")))
}

fn solver_exact() -> Result<(bool, f64, String)> {
    let grids: Vec<GridSpec> = [16.0, 32.0, 64.0].iter().map(|n| upper(1.0 / n)).collect();
    let rows = convergence_study(ManufacturedCase::Y2, &grids)?;
    let worst = max_of(rows.iter().map(|r| r.l2_error));
    Ok((rows.iter().all(|r| r.exact), worst, "y^2 on three grids".into()))
}

fn clamped_polys(count: usize) -> Vec<Poly> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..count).map(|_| Poly::random_clamped(&mut rng, 4)).collect()
}

fn reflection_identity() -> Result<(bool, f64, String)> {
    let mut worst_gap = 0.0_f64;
    let mut worst_order = f64::INFINITY;
    for u in clamped_polys(3) {
        let gap = |n: f64| -> Result<f64> {
            let f = ScalarField::from_fn(&upper(1.0 / n), |x, y| u.eval(x, y));
            reflection_identity_relative(&extend_with_tol(&f, 1e-3 * f.max_abs())?)
        };
        let (a, b, c) = (gap(32.0)?, gap(64.0)?, gap(128.0)?);
        worst_gap = worst_gap.max(c);
        worst_order = worst_order.min(order(a, b));
    }
    Ok((worst_gap <= 5e-3 && worst_order >= 1.8, worst_gap, format!("worst order {worst_order:.3}")))
}

fn reflection_f1() -> Result<(bool, f64, String)> {
    let polys = clamped_polys(25);
    let exact = polys.iter().all(|u| symbolic::identity_gap(u).is_zero());
    // grid F1 of a polynomial source against the symbolic transform
    let src = &polys[0].bilaplacian() + &Poly::term(3, 2, 2);
    let f1 = symbolic::f1(&src);
    let g = upper(1.0 / 64.0);
    let fd = f1_of(&ScalarField::from_fn(&g, |x, y| src.eval(x, y)))?;
    let lg = *fd.grid();
    let mut err = 0.0_f64;
    let mut scale = 0.0_f64;
    for k in 0..lg.ny {
        for i in 0..lg.nx {
            let e = f1.eval(lg.x(i), lg.y(k));
            err = err.max((fd.at(i, k) - e).abs());
            scale = scale.max(e.abs());
        }
    }
    let rel = err / scale.max(1.0);
    Ok((exact && rel <= 1e-8, rel, "25 exact rational identities; grid transform of a quartic source".into()))
}

fn reflection_traces() -> Result<(bool, f64, String)> {
    let mut worst = 0.0_f64;
    for h in [1.0 / 32.0, 1.0 / 64.0] {
        let u = ScalarField::from_fn(&upper(h), |x, y| y * y * (2.0 * x).sin() * (1.0 + y));
        worst = worst.max(trace_residuals(&extend(&u)?)?.max() / (h * h * u.max_abs()));
    }
    Ok((worst <= 5.0, worst, "residual / (h^2 |u|)".into()))
}

fn reflection_singular_part() -> Result<(bool, f64, String)> {
    let u = ScalarField::from_fn(&upper(1.0 / 32.0), |x, y| y * y * (1.0 + x * y));
    let ext = extend(&u)?;
    let zero = [ScalarField::zeros(ext.w.grid()), ScalarField::zeros(ext.w.grid())];
    let h = h_of(&ext, &zero)?;
    let m = h.h.max_abs_on(Some(h.h.mask()));
    let residual = reflection_identity_residual(&ext)?;
    Ok((m == 0.0 && residual.is_finite(), m, format!("{} rows excluded", h.excluded_rows.len())))
}

fn weight_identities() -> Result<(bool, f64, String)> {
    let (mut exact, mut slope) = (0.0_f64, 0.0_f64);
    for eps in [0.25, 0.5, 0.75] {
        let w = CarlemanWeight::new(eps)?;
        for k in 0..200 {
            let t = -20.0 + 0.1 * k as f64;
            exact = exact.max((w.phi_s(t.exp()).ln() - w.phi_t(t)).abs());
            let d = 1e-4;
            slope = slope.max(((w.phi_t(t + d) - w.phi_t(t - d)) / (2.0 * d) - w.dphi(t)).abs());
        }
    }
    let s: f64 = 0.3;
    exact = exact.max((CarlemanWeight::main().phi_s(s) - s / (1.0 + s.sqrt()).powi(2)).abs());
    Ok((exact <= 1e-12 && slope <= 1e-7, exact, format!("profile slope gap {slope:.1e}")))
}

fn hardy_ratio() -> Result<(bool, f64, String)> {
    let h = hardy_summary(24, 100)?;
    Ok((h.max_constant <= 4.2, h.max_constant, "100 random admissible profiles".into()))
}

fn hardy_closed_form() -> Result<(bool, f64, String)> {
    let h = hardy_summary(24, 0)?;
    let err = (h.closed_form_lhs - 0.5).abs().max((h.closed_form_rhs - 1.0).abs());
    Ok((err <= 1e-2, err, "s e^-s gives (1/2, 1)".into()))
}

fn carleman_split() -> Result<(bool, f64, String)> {
    let (a, b) = (identity_level(64)?, identity_level(128)?);
    let o = order(a.split_residual, b.split_residual);
    Ok(((1.7..=2.3).contains(&o), o, "h = 2pi/64 -> 2pi/128".into()))
}

fn carleman_i1() -> Result<(bool, f64, String)> {
    let l = identity_level(128)?;
    Ok((l.i1_gap <= 0.02, l.i1_gap, "h = 2pi/128".into()))
}

fn carleman_ibp() -> Result<(bool, f64, String)> {
    let (a, b) = (identity_level(64)?, identity_level(128)?);
    let gap = max_of(b.ibp_gaps);
    let orders: Vec<f64> = a.ibp_gaps.iter().zip(&b.ibp_gaps).map(|(x, y)| order(*x, *y)).collect();
    let ok = gap <= 0.02 && orders.iter().all(|o| (1.7..=2.3).contains(o));
    Ok((ok, gap, format!("orders {orders:?}")))
}

fn homogeneity() -> Result<(bool, f64, String)> {
    let base = TestShape::random("u", &mut ChaCha8Rng::seed_from_u64(5));
    let scaled = TestShape { amplitude: 37.0, ..base.clone() };
    let q = |s: &TestShape, laplace: bool| -> Result<f64> {
        let f = s.at_scale(0.1)?;
        let p = DerivativeProfile::new(&f.to_cylinder(&f.cylinder_grid(0.01, 32)?))?;
        Ok(if laplace { laplace_lhs_rhs(&p, 8.0, 0.1, &CarlemanWeight::main())?.q } else { bilap_lhs_rhs(&p, 8.0, 0.1)?.q })
    };
    let mut worst = 0.0_f64;
    for laplace in [true, false] {
        let (a, b) = (q(&base, laplace)?, q(&scaled, laplace)?);
        worst = worst.max((a - b).abs() / a);
    }
    Ok((worst <= 1e-10, worst, "U -> 37 U leaves Q unchanged".into()))
}

fn carleman_ratio(kind: EstimateKind, baseline: fn(&Baselines) -> f64) -> Result<(bool, f64, String)> {
    let committed = Baselines::committed()?;
    let cfg = standard_sweep(kind);
    let family = cfg.family();
    let q = ratio_sweep(&family, &cfg, Execution::default())?.max_q();
    let q2 = ratio_sweep(&family, &cfg.refined(), Execution::default())?.max_q();
    let change = (q - q2).abs() / q2;
    let b = baseline(&committed);
    Ok((q.is_finite() && change < 0.1 && q <= 1.1 * b, q, format!("h/2 change {:.2}%, baseline {b:e}", 100.0 * change)))
}

fn carleman_bilap() -> Result<(bool, f64, String)> {
    carleman_ratio(EstimateKind::Bilaplacian, |b| b.carleman_bilaplacian_max_q)
}

fn carleman_laplace() -> Result<(bool, f64, String)> {
    carleman_ratio(EstimateKind::Laplace { epsilon: 0.5 }, |b| b.carleman_laplace_max_q)
}

fn conformal_flat() -> Result<(bool, f64, String)> {
    let c = certify(&build_map(&BoundaryGraph::flat(1.0, 0.5)?, 32)?);
    let worst = max_of([c.conformality_residual, c.round_trip, c.boundary_error, (c.jacobian_min_det - 1.0).abs()]);
    Ok((worst <= 1e-8, worst, "flat boundary maps to the identity".into()))
}

fn conformal_curved() -> Result<(bool, f64, String)> {
    let graph = BoundaryGraph::quadratic(0.1, 1.0, 0.5)?;
    let (a, b) = (certify(&build_map(&graph, 32)?), certify(&build_map(&graph, 64)?));
    let o = order(a.conformality_residual_interior, b.conformality_residual_interior);
    let ok = (1.8..=2.2).contains(&o) && a.jacobian_min_det > 0.0 && b.jacobian_min_det > 0.0;
    Ok((ok, o, format!("min det {:.3}", b.jacobian_min_det)))
}

fn conformal_pullback() -> Result<(bool, f64, String)> {
    let graph = BoundaryGraph::quadratic(0.1, 1.0, 0.5)?;
    let map = build_map(&graph, 32)?;
    let pg = graph.physical_grid(1.0 / 64.0)?;
    let v = ScalarField::from_fn(&pg, |x, y| (y - graph.g(x)).powi(2));
    let u = pullback_solution(&map, &v)?;
    let r = *map.rect();
    let trace = max_of((0..r.nx).map(|i| u.at(i, 0).abs()));
    let drift = transformed_drift(&map, &[ScalarField::from_fn(&pg, |x, _| 0.5 * x), ScalarField::constant(&pg, 1.0)])?;
    let finite = drift.iter().all(|f| f.values().iter().all(|v| v.is_finite()));
    let limit = r.h * v.max_abs();
    Ok((finite && trace <= limit, trace, "clamped trace survives the pullback; drift finite".into()))
}

fn doubling_homogeneous() -> Result<(bool, f64, String)> {
    let g = upper(1.0 / 128.0);
    let mut worst = 0.0_f64;
    for (v, target) in [
        (ScalarField::from_fn(&g, |_, y| y * y), 64.0),
        (ScalarField::from_fn(&g, |x, y| y * y * (y - 3.0 * x)), 256.0),
    ] {
        let scan = doubling_scan(&v, (0.0, 0.0), 1.0, 2.0, Execution::default())?;
        worst = worst.max(max_of(scan.ratios.iter().map(|d| (d / target - 1.0).abs())));
    }
    Ok((worst <= 0.03, worst, "degrees 2 and 3 on every dyadic radius".into()))
}

fn doubling_frequency() -> Result<(bool, f64, String)> {
    let g = upper(1.0 / 128.0);
    let n = frequency(&ScalarField::from_fn(&g, |_, y| y * y), (0.0, 0.0), 0.5, 2.0)?;
    let err = (n / 64.0 - 1.0).abs();
    Ok((err <= 0.05, n, "y^2 with C_art = 2 gives 2^6".into()))
}

fn doubling_tau0() -> Result<(bool, f64, String)> {
    let t = tau0_select(3.0, 1.0, 1.0, 80.0, 1.0)?;
    let err = (t - (3.0 + 320f64.ln() / 4f64.ln())).abs();
    Ok((err <= 1e-6 && (t - 7.1610).abs() < 1e-4, t, "3 + log_4 320".into()))
}

fn doubling_propagate() -> Result<(bool, f64, String)> {
    let p = propagate(1.0, 2.0, 0.01, 0.04)?;
    let q = propagate(1.0, 2.0, 0.01, 0.08)?;
    let ok = p.j == 2 && (p.bound - 8.0 * 4f64.powf(3.0)).abs() < 1e-9 && q.bound > p.bound;
    Ok((ok, p.bound, "C = 1, N-bar = 2, s/r = 4".into()))
}

fn doubling_variation() -> Result<(bool, f64, String)> {
    let u = reference_solution(0.5, 1.0 / 128.0)?;
    let ds = SCAN_RADII.iter().map(|r| doubling_ratio(&u, (0.0, 0.0), *r)).collect::<Result<Vec<_>>>()?;
    let v = ds.iter().copied().fold(f64::MIN, f64::max) / ds.iter().copied().fold(f64::MAX, f64::min) - 1.0;
    Ok((v <= 0.1, v, format!("D = {ds:?}")))
}

fn lemma_chain() -> Result<(bool, f64, String)> {
    let u = reference_solution(REFERENCE_HALF_WIDTH, REFERENCE_H)?;
    let audit = lemma_terms_audit(&u, &standard_lemma_params(), Execution::default())?;
    let taus: Vec<f64> = (4..=20).map(f64::from).collect();
    let chain = doubling_chain(&u, 0.04, 0.4, &taus, Execution::default())?;
    let ok = audit.c_hat_max.is_finite() && chain.holds && chain.form_gap <= 1e-10;
    Ok((ok, audit.c_hat_max, format!("tau0 {:.4}, N-bar {:.1}", chain.tau0, chain.n_bar)))
}

/// Worst `measured / committed` over paired constants.
fn worst_ratio(measured: &[f64], committed: &[f64]) -> f64 {
    measured.iter().zip(committed).map(|(v, b)| v / b).fold(0.0, f64::max)
}

fn caccioppoli() -> Result<(bool, f64, String)> {
    let u = reference_solution(REFERENCE_HALF_WIDTH, REFERENCE_H)?;
    let scan = caccioppoli_scan(&u, (0.0, 0.0), &SCAN_RADII, 6, Execution::default())?;
    let measured: Vec<f64> = (1..=6).map(|h| scan.max_for(h)).collect();
    let worst = worst_ratio(&measured, &Baselines::committed()?.caccioppoli_max);
    Ok((worst <= SCAN_FACTOR, worst, "orders 1 to 6, measured / baseline".into()))
}

fn interpolation() -> Result<(bool, f64, String)> {
    let u = reference_solution(REFERENCE_HALF_WIDTH, REFERENCE_H)?;
    let committed = Baselines::committed()?.interpolation;
    let measured = committed
        .iter()
        .map(|b| {
            let rows = interpolation_scan(&u, (0.0, 0.0), SCAN_RADII[0], b.m, b.j, &INTERPOLATION_EPS)?;
            Ok(max_of(rows.iter().map(|r| r.c_hat)))
        })
        .collect::<Result<Vec<_>>>()?;
    let base: Vec<f64> = committed.iter().map(|b| b.max_c_hat).collect();
    let worst = worst_ratio(&measured, &base);
    Ok((worst <= SCAN_FACTOR, worst, format!("{} (m, j) pairs, measured / baseline", base.len())))
}

fn reverse_holder() -> Result<(bool, f64, String)> {
    let u = reference_solution(REFERENCE_HALF_WIDTH, REFERENCE_H)?;
    let rh = max_of(reverse_holder_scan(&u, 0.0, SCAN_RADII[0], REVERSE_HOLDER_Q)?.iter().map(|r| r.ratio));
    let worst = rh / Baselines::committed()?.reverse_holder_max;
    let g = upper(1.0 / 64.0);
    let constant = reverse_holder_ratio(&ScalarField::from_fn(&g, |_, y| y * y * y), 0.0, 0.5, 6.0)?;
    Ok((worst <= SCAN_FACTOR && constant == 1.0, worst, format!("max ratio {rh:.4}; constant trace ratio {constant}")))
}

pub static REGISTRY: &[Check] = &[
    Check { id: "field.derive.commute", anchor: "mixed finite-difference partials commute on polynomials", tolerance: "relative gap <= 1e-12", covers: &["derive"], slow: false, run: derive_commute },
    Check { id: "field.integrate.half-disc", anchor: "cut-cell quadrature on half discs", tolerance: "area error < 1e-3", covers: &["integrate"], slow: false, run: integrate_half_disc },
    Check { id: "field.log-weight.shift", anchor: "log-space weighted quadrature with constant weight", tolerance: "log error <= 1e-10 for |c| <= 500", covers: &["weighted_integrate_log"], slow: false, run: log_weight_shift },
    Check { id: "field.cutoff.profile", anchor: "annular cutoff plateau, support and range", tolerance: "exact on 10^4 samples", covers: &["build_cutoff"], slow: false, run: cutoff_profile },
    Check { id: "plate.convexity", anchor: "strong convexity of the Lame moduli and Poisson range", tolerance: "accept/reject as expected, nu < 1/2", covers: &["check_strong_convexity", "derive_material"], slow: false, run: convexity },
    Check { id: "plate.form-equivalence", anchor: "divergence and non-divergence forms of the plate operator agree", tolerance: "order >= 1.8", covers: &["apply_L_div", "apply_L_nondiv", "form_equivalence_residual"], slow: false, run: form_equivalence },
    Check { id: "solver.manufactured-order", anchor: "clamped solver on y^2 sin(pi x)", tolerance: "order in [1.7, 2.3]", covers: &["assemble", "solve", "convergence_study"], slow: false, run: solver_order },
    Check { id: "solver.stencil-exact", anchor: "clamped solver reproduces y^2", tolerance: "L2 error <= 1e-9", covers: &["assemble", "solve"], slow: false, run: solver_exact },
    Check { id: "reflection.identity", anchor: "bilaplacian of the reflected extension equals the reflected source", tolerance: "gap <= 5e-3 at h = 1/128, order >= 1.8", covers: &["extend", "reflection_identity_residual"], slow: false, run: reflection_identity },
    Check { id: "reflection.f1", anchor: "reflected source transform, exact rational oracle", tolerance: "exact; grid transform <= 1e-8", covers: &["f1_of"], slow: false, run: reflection_f1 },
    Check { id: "reflection.traces", anchor: "vanishing boundary traces of the extension", tolerance: "<= 5 h^2 |u|", covers: &["trace_residuals", "extend"], slow: false, run: reflection_traces },
    Check { id: "reflection.singular-part", anchor: "singular part vanishes without drift", tolerance: "exactly 0", covers: &["h_of"], slow: false, run: reflection_singular_part },
    Check { id: "carleman.weight", anchor: "Carleman weight and its log-polar profile", tolerance: "<= 1e-12", covers: &["weight_eval"], slow: false, run: weight_identities },
    Check { id: "hardy.ratio", anchor: "one-dimensional Hardy inequality with constant 4", tolerance: "constant <= 4 x 1.05", covers: &["hardy_check"], slow: false, run: hardy_ratio },
    Check { id: "hardy.closed-form", anchor: "Hardy terms for s e^-s", tolerance: "within 1e-2 of (1/2, 1)", covers: &["hardy_check"], slow: false, run: hardy_closed_form },
    Check { id: "carleman.split", anchor: "conjugated Laplacian splits into symmetric and antisymmetric parts", tolerance: "order in [1.7, 2.3]", covers: &["conjugate_split"], slow: false, run: carleman_split },
    Check { id: "carleman.i1", anchor: "commutator cross-term identity", tolerance: "gap <= 0.02", covers: &["commutator_i1_check"], slow: false, run: carleman_i1 },
    Check { id: "carleman.ibp", anchor: "weighted integration-by-parts identities", tolerance: "gap <= 0.02, order in [1.7, 2.3]", covers: &["ibp_identity_check"], slow: false, run: carleman_ibp },
    Check { id: "carleman.homogeneity", anchor: "Carleman ratios are invariant under scaling of the test function", tolerance: "<= 1e-10", covers: &["laplace_lhs_rhs", "bilap_lhs_rhs"], slow: false, run: homogeneity },
    Check { id: "carleman.laplace.ratio", anchor: "Laplace Carleman estimate ratio over the seeded family", tolerance: "finite, h/2 change < 10%, <= baseline x 1.1", covers: &["laplace_lhs_rhs", "ratio_sweep"], slow: true, run: carleman_laplace },
    Check { id: "carleman.bilap.ratio", anchor: "bilaplacian Carleman estimate ratio over the seeded family", tolerance: "finite, h/2 change < 10%, <= baseline x 1.1", covers: &["bilap_lhs_rhs", "ratio_sweep"], slow: true, run: carleman_bilap },
    Check { id: "conformal.flat", anchor: "flattening of a flat boundary is the identity", tolerance: "<= 1e-8", covers: &["build_map", "certify"], slow: false, run: conformal_flat },
    Check { id: "conformal.curved", anchor: "conformality of the flattening map for a curved boundary", tolerance: "order in [1.8, 2.2], Jacobian > 0", covers: &["build_map", "certify"], slow: false, run: conformal_curved },
    Check { id: "conformal.pullback", anchor: "pullback keeps clamped traces; transformed drift is finite", tolerance: "trace <= h |v|", covers: &["pullback_solution", "transformed_drift"], slow: false, run: conformal_pullback },
    Check { id: "doubling.homogeneous", anchor: "doubling ratio of homogeneous clamped biharmonics", tolerance: "within 3% of 2^(2d+2)", covers: &["doubling_ratio"], slow: false, run: doubling_homogeneous },
    Check { id: "doubling.frequency", anchor: "frequency of a homogeneous solution", tolerance: "within 5%", covers: &["frequency"], slow: false, run: doubling_frequency },
    Check { id: "doubling.tau0", anchor: "choice of the absorbing Carleman parameter", tolerance: "<= 1e-6", covers: &["tau0_select"], slow: false, run: doubling_tau0 },
    Check { id: "doubling.propagate", anchor: "iterating the doubling inequality across scales", tolerance: "exact on the hand case, monotone", covers: &["propagate"], slow: false, run: doubling_propagate },
    Check { id: "doubling.r-independence", anchor: "doubling ratio of a solver solution is scale independent", tolerance: "variation <= 10%", covers: &["doubling_ratio"], slow: false, run: doubling_variation },
    Check { id: "doubling.lemma-chain", anchor: "Carleman-to-doubling chain on a solver solution", tolerance: "finite constant, chain holds", covers: &["lemma_terms_audit", "tau0_select"], slow: true, run: lemma_chain },
    Check { id: "doubling.caccioppoli", anchor: "boundary Caccioppoli constants", tolerance: "<= baseline x 1.2", covers: &["caccioppoli_scan"], slow: true, run: caccioppoli },
    Check { id: "doubling.interpolation", anchor: "interpolation inequality constants", tolerance: "<= baseline x 1.2", covers: &["interpolation_scan"], slow: true, run: interpolation },
    Check { id: "doubling.reverse-holder", anchor: "reverse Holder ratio of third-derivative traces", tolerance: "<= baseline x 1.2; constant trace exactly 1", covers: &["reverse_holder_ratio"], slow: true, run: reverse_holder },
];

#[cfg(test)]
mod tests {
    use super::*;

    const OPERATIONS: &[&str] = &[
        "derive", "integrate", "weighted_integrate_log", "build_cutoff", "derive_material", "check_strong_convexity",
        "apply_L_div", "apply_L_nondiv", "form_equivalence_residual", "assemble", "solve", "convergence_study", "extend",
        "f1_of", "reflection_identity_residual", "h_of", "trace_residuals", "weight_eval", "hardy_check",
        "conjugate_split", "commutator_i1_check", "ibp_identity_check", "laplace_lhs_rhs", "bilap_lhs_rhs",
        "ratio_sweep", "build_map", "certify", "pullback_solution", "transformed_drift", "doubling_ratio", "frequency",
        "tau0_select", "lemma_terms_audit", "propagate", "caccioppoli_scan", "interpolation_scan",
        "reverse_holder_ratio",
    ];

    #[test]
    fn every_operation_is_reachable() {
        for op in OPERATIONS {
            assert!(REGISTRY.iter().any(|c| c.covers.contains(op)), "no check covers {op}");
        }
        for c in REGISTRY {
            for op in c.covers {
                assert!(OPERATIONS.contains(op), "{} covers unknown operation {op}", c.id);
            }
        }
    }

    #[test]
    fn ids_are_unique_and_dotted() {
        let mut ids: Vec<&str> = REGISTRY.iter().map(|c| c.id).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), REGISTRY.len());
        assert!(ids.iter().all(|id| id.contains('.') && !id.contains(' ')));
        assert!(REGISTRY.len() >= 20);
    }

    #[test]
    fn fast_checks_pass() {
        for c in REGISTRY.iter().filter(|c| !c.slow) {
            let r = c.run();
            assert!(r.pass, "{} failed: value {} ({})", r.id, r.value, r.detail);
        }
    }
}
