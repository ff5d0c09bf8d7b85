//! One runner per experiment block. Each writes its artifacts under the
//! scenario's output directory and returns the checks it evaluated.

use std::path::PathBuf;

use platelab_core::carleman::{ratio_sweep, EstimateKind, SweepConfig};
use platelab_core::conformal::{build_map_with, certify_with, BoundaryGraph};
use platelab_core::doubling::{doubling_chain, doubling_scan, lemma_terms_audit, reference_solution, LemmaParams};
use platelab_core::field::io::field_to_csv;
use platelab_core::field::{GridSpec, ScalarField};
use platelab_core::plate::{check_strong_convexity, derive_material, form_equivalence_residual};
use platelab_core::reflection::{extend_with_tol, jumps, reflection_identity_relative, trace_residuals};
use platelab_core::report::{csv_table, fmt_f64, write_atomic, write_json};
use platelab_core::solver::{assemble, convergence_study_with, solve, ManufacturedCase};
use platelab_core::Execution;
use serde::Serialize;
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::fixtures::{hardy_summary, identity_level, order};
use crate::scenario::*;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub id: String,
    pub pass: bool,
    pub value: f64,
    pub tolerance: String,
    pub detail: String,
}

impl CheckResult {
    fn at_most(id: &str, value: f64, limit: f64, detail: impl Into<String>) -> Self {
        Self { id: id.into(), pass: value <= limit, value, tolerance: format!("<= {limit}"), detail: detail.into() }
    }

    fn within(id: &str, value: f64, lo: f64, hi: f64, detail: impl Into<String>) -> Self {
        Self { id: id.into(), pass: (lo..=hi).contains(&value), value, tolerance: format!("in [{lo}, {hi}]"), detail: detail.into() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub experiment: &'static str,
    pub seed: Option<u64>,
    pub pass: bool,
    pub checks: Vec<CheckResult>,
    pub artifacts: Vec<String>,
    pub details: serde_json::Value,
}

/// Collects artifacts; every file goes through the atomic writer.
struct Artifacts {
    dir: PathBuf,
    written: Vec<String>,
}

impl Artifacts {
    fn text(&mut self, name: &str, body: &str) -> CliResult<()> {
        write_atomic(&self.dir.join(name), body.as_bytes())?;
        self.written.push(name.into());
        Ok(())
    }
}

fn finish(
    experiment: &'static str,
    scenario: &Scenario,
    mut art: Artifacts,
    checks: Vec<CheckResult>,
    details: serde_json::Value,
) -> CliResult<RunReport> {
    let name = format!("{experiment}.json");
    art.written.push(name.clone());
    let report = RunReport {
        experiment,
        seed: scenario.seed,
        pass: checks.iter().all(|c| c.pass),
        checks,
        artifacts: art.written,
        details,
    };
    write_json(&art.dir.join(&name), &report)?;
    Ok(report)
}

pub fn run(scenario: &Scenario, exec: Execution) -> CliResult<RunReport> {
    let art = Artifacts { dir: scenario.out.clone(), written: Vec::new() };
    match scenario.experiment()? {
        Experiment::MaterialCheck(p) => material_check(scenario, &p, art),
        Experiment::Solve(p) => solve_case(scenario, &p, art, exec),
        Experiment::Reflect(p) => reflect(scenario, &p, art),
        Experiment::Carleman(p) => carleman(scenario, &p, art, exec),
        Experiment::Conformal(p) => conformal(scenario, &p, art, exec),
        Experiment::Doubling(p) => doubling(scenario, &p, art, exec),
        Experiment::Identities(p) => identities(scenario, &p, art),
    }
}

fn material_check(s: &Scenario, p: &MaterialCheckParams, mut art: Artifacts) -> CliResult<RunReport> {
    let grid = s.grid.spec()?;
    let lame = s.lame(&grid)?;
    let convexity = check_strong_convexity(&lame);
    let mut checks = vec![CheckResult {
        id: "plate.convexity".into(),
        pass: convexity.pass,
        value: convexity.mu_margin.min(convexity.gamma_margin),
        tolerance: ">= 0".into(),
        detail: format!("mu margin {:e}, 2mu+3lambda margin {:e}", convexity.mu_margin, convexity.gamma_margin),
    }];
    let mut details = json!({ "convexity": convexity });
    if convexity.pass {
        let mat = derive_material(&lame)?;
        let nu = mat.poisson.values();
        let (lo, hi) = nu.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
        checks.push(CheckResult {
            id: "plate.poisson-range".into(),
            pass: lo > -1.0 && hi < 0.5,
            value: hi,
            tolerance: "in (-1, 1/2)".into(),
            detail: format!("nu in [{lo}, {hi}]"),
        });
        let probe = expression("experiment.material-check.probe", &p.probe)?;
        let residual_on = |g: &GridSpec| -> CliResult<f64> {
            let m = derive_material(&s.lame(g)?)?;
            Ok(form_equivalence_residual(&m, &ScalarField::from_fn(g, |x, y| probe.eval(x, y)))?)
        };
        let coarse = residual_on(&grid)?;
        let uses_csv = s.material.as_ref().is_some_and(|m| m.lambda_csv.is_some() || m.mu_csv.is_some());
        let mut rows = vec![vec![fmt_f64(grid.h), fmt_f64(coarse)]];
        if p.refine && !uses_csv {
            let fine_grid = grid.refined();
            let fine = residual_on(&fine_grid)?;
            rows.push(vec![fmt_f64(fine_grid.h), fmt_f64(fine)]);
            // constant moduli make both forms coincide to rounding
            if coarse <= 1e-9 {
                checks.push(CheckResult::at_most("plate.form-equivalence", coarse, 1e-9, "forms agree to rounding"));
            } else {
                let o = order(coarse, fine);
                checks.push(CheckResult::within("plate.form-equivalence", o, p.min_order, f64::INFINITY, format!("residuals {coarse:e} -> {fine:e}")));
            }
        }
        art.text("form_equivalence.csv", &csv_table(&["h", "residual"], &rows))?;
        details["poisson_range"] = json!([lo, hi]);
        details["form_residuals"] = json!(rows);
    }
    finish("material-check", s, art, checks, details)
}

fn solve_case(s: &Scenario, p: &SolveParams, mut art: Artifacts, exec: Execution) -> CliResult<RunReport> {
    let case = ManufacturedCase::from_id(&p.case).map_err(|e| CliError::config("experiment.solve.case", e))?;
    if p.levels.len() < 3 {
        return Err(CliError::config("experiment.solve.levels", "need at least 3 nested grids"));
    }
    let grids = p
        .levels
        .iter()
        .map(|n| GridSpec::with_spacing((-1.0, 1.0), (0.0, 1.0), 1.0 / *n as f64))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::config("experiment.solve.levels", e))?;
    let rows = convergence_study_with(case, &grids, exec)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                fmt_f64(r.h),
                fmt_f64(r.l2_error),
                r.order.map(fmt_f64).unwrap_or_else(|| if r.exact { "exact".into() } else { String::new() }),
                fmt_f64(r.report.residual),
            ]
        })
        .collect();
    art.text("convergence.csv", &csv_table(&["h", "l2_error", "order", "residual"], &table))?;
    let check = if rows.iter().all(|r| r.exact) {
        let worst = rows.iter().map(|r| r.l2_error).fold(0.0, f64::max);
        CheckResult::at_most("solver.stencil-exact", worst, 1e-9, "every level at rounding level")
    } else {
        let orders: Vec<f64> = rows.iter().filter_map(|r| r.order).collect();
        let worst = orders.iter().copied().fold(f64::NAN, |a, o| if (o - 2.0).abs() > (a - 2.0).abs() || a.is_nan() { o } else { a });
        CheckResult::within("solver.manufactured-order", worst, 1.7, 2.3, format!("orders {orders:?}"))
    };
    if p.dump {
        let (u, _) = solve(&assemble(&case.bvp(grids.last().expect("three grids"))?)?)?;
        art.text("solution.csv", &field_to_csv(&u))?;
    }
    finish("solve", s, art, vec![check], json!({ "case": case.id(), "rows": rows }))
}

fn reflect(s: &Scenario, p: &ReflectParams, mut art: Artifacts) -> CliResult<RunReport> {
    let grid = s.grid.spec()?;
    let f = expression("experiment.reflect.field", &p.field)?;
    let u = ScalarField::from_fn(&grid, |x, y| f.eval(x, y));
    let ext = extend_with_tol(&u, p.clamp_rtol * u.max_abs())?;
    let gap = reflection_identity_relative(&ext)?;
    let traces = trace_residuals(&ext)?;
    let jump = jumps(&ext)?;
    let trace_limit = p.trace_factor * grid.h * grid.h * u.max_abs();
    art.text("extension.csv", &field_to_csv(&ext.full))?;
    let checks = vec![
        CheckResult::at_most("reflection.identity", gap, p.gap_tol, "relative defect of the reflected source identity"),
        CheckResult::at_most("reflection.traces", traces.max(), trace_limit, format!("{traces:?}")),
    ];
    finish("reflect", s, art, checks, json!({ "h": grid.h, "identity_gap": gap, "traces": traces, "jumps": jump }))
}

fn carleman(s: &Scenario, p: &CarlemanParams, mut art: Artifacts, exec: Execution) -> CliResult<RunReport> {
    let kind = match p.estimate.as_str() {
        "bilaplacian" => EstimateKind::Bilaplacian,
        "laplace" => EstimateKind::Laplace { epsilon: p.epsilon },
        other => {
            return Err(CliError::config("experiment.carleman.estimate", format!("expected bilaplacian or laplace, got {other:?}")))
        }
    };
    let cfg = SweepConfig {
        kind,
        seed: s.seed(),
        family_size: p.family_size,
        tau_grid: p.taus.clone(),
        r_grid: p.radii.clone(),
        ht: p.ht,
        ntheta: p.ntheta,
    };
    let family = cfg.family();
    let report = ratio_sweep(&family, &cfg, exec)?;
    let q = report.max_q();
    art.text("sweep.csv", &report.to_csv())?;
    let mut checks = vec![CheckResult {
        id: "carleman.finite".into(),
        pass: q.is_finite(),
        value: q,
        tolerance: "finite".into(),
        detail: format!("{} rows", report.rows.len()),
    }];
    let mut details = report.sidecar();
    if p.refine {
        let fine = ratio_sweep(&family, &cfg.refined(), exec)?;
        let change = (q - fine.max_q()).abs() / fine.max_q();
        checks.push(CheckResult::at_most("carleman.grid-stable", change, 0.1, format!("max Q {q:e} -> {:e}", fine.max_q())));
        details["refined_max_q"] = json!(fine.max_q());
    }
    if let Some(b) = p.baseline {
        checks.push(CheckResult::at_most("carleman.baseline", q, b * p.factor, format!("baseline {b:e} x {}", p.factor)));
    }
    finish("carleman", s, art, checks, details)
}

fn conformal(s: &Scenario, p: &ConformalParams, mut art: Artifacts, exec: Execution) -> CliResult<RunReport> {
    let gc = s.graph.as_ref().ok_or_else(|| CliError::config("graph", "the conformal experiment needs a [graph] table"))?;
    let graph = BoundaryGraph::new(gc.coefficients.clone(), gc.r0, gc.m0).map_err(|e| CliError::config("graph", e))?;
    let map = build_map_with(&graph, p.n, exec)?;
    let cert = certify_with(&map, exec);
    if p.dump {
        art.text("map.csv", &map.to_csv())?;
    }
    let checks = vec![
        CheckResult {
            id: "conformal.jacobian".into(),
            pass: cert.jacobian_min_det > 0.0,
            value: cert.jacobian_min_det,
            tolerance: "> 0".into(),
            detail: "minimum Jacobian determinant over the rectangle".into(),
        },
        CheckResult::at_most("conformal.round-trip", cert.round_trip, 1e-10, "inverse map composed with forward map"),
        CheckResult::at_most("conformal.ratio-spread", cert.ratio_max / cert.ratio_min, p.max_ratio_spread, format!("|Phi(y)|/|y| in [{}, {}]", cert.ratio_min, cert.ratio_max)),
    ];
    finish("conformal", s, art, checks, json!({ "n": p.n, "certification": cert }))
}

fn doubling(s: &Scenario, p: &DoublingParams, mut art: Artifacts, exec: Execution) -> CliResult<RunReport> {
    let u = if p.field == "reference" {
        reference_solution(p.half_width, s.grid.h)?
    } else {
        let f = expression("experiment.doubling.field", &p.field)?;
        ScalarField::from_fn(&s.grid.spec()?, |x, y| f.eval(x, y))
    };
    let center = (p.center[0], p.center[1]);
    let scan = doubling_scan(&u, center, p.r0, p.c_art, exec)?;
    art.text("doubling.csv", &scan.to_csv())?;
    let mut checks = Vec::new();
    match p.expected {
        Some(target) => {
            let worst = scan.ratios.iter().map(|d| (d / target - 1.0).abs()).fold(0.0, f64::max);
            checks.push(CheckResult::at_most("doubling.homogeneous", worst, p.rtol, format!("target {target}, {} radii", scan.radii.len())));
        }
        None => checks.push(CheckResult::at_most(
            "doubling.r-independence",
            scan.variation(),
            p.max_variation,
            format!("max D / min D - 1 over {} radii", scan.radii.len()),
        )),
    }
    let mut details = json!({ "scan": scan });
    if let Some(l) = &p.lemma {
        let params = LemmaParams { r: l.r, big_r: l.big_r, r0_bar: l.r0_bar, taus: l.taus.clone() };
        let audit = lemma_terms_audit(&u, &params, exec)?;
        art.text("lemma.csv", &audit.to_csv())?;
        checks.push(CheckResult {
            id: "doubling.lemma-finite".into(),
            pass: audit.c_hat_max.is_finite(),
            value: audit.c_hat_max,
            tolerance: "finite".into(),
            detail: format!("{} tau values", audit.rows.len()),
        });
        details["lemma"] = json!(audit);
        if let Some(r) = l.chain_r {
            let chain = doubling_chain(&u, r, l.r0_bar, &l.taus, exec)?;
            checks.push(CheckResult {
                id: "doubling.chain".into(),
                pass: chain.holds,
                value: chain.ln_bound,
                tolerance: "measured doubling within the chained bound".into(),
                detail: format!("tau0 {}, N-bar {}", chain.tau0, chain.n_bar),
            });
            details["chain"] = json!(chain);
        }
    }
    finish("doubling", s, art, checks, details)
}

fn identities(s: &Scenario, p: &IdentitiesParams, mut art: Artifacts) -> CliResult<RunReport> {
    if p.levels.len() < 2 {
        return Err(CliError::config("experiment.identities.levels", "need at least two resolutions"));
    }
    let levels = p.levels.iter().map(|n| identity_level(*n)).collect::<Result<Vec<_>, _>>()?;
    let hardy = hardy_summary(s.seed(), p.hardy_profiles)?;
    let (coarse, fine) = (&levels[levels.len() - 2], &levels[levels.len() - 1]);
    let ibp_gap = fine.ibp_gaps.iter().copied().fold(0.0, f64::max);
    let ibp_orders: Vec<f64> = coarse.ibp_gaps.iter().zip(&fine.ibp_gaps).map(|(a, b)| order(*a, *b)).collect();
    let ibp_worst = ibp_orders.iter().copied().fold(2.0_f64, |w, o| if (o - 2.0).abs() > (w - 2.0).abs() { o } else { w });
    let table: Vec<Vec<String>> = levels
        .iter()
        .map(|l| {
            let mut row = vec![l.n.to_string(), fmt_f64(l.split_residual), fmt_f64(l.i1_gap)];
            row.extend(l.ibp_gaps.iter().map(|g| fmt_f64(*g)));
            row
        })
        .collect();
    art.text("identities.csv", &csv_table(&["n", "split_residual", "i1_gap", "ibp1", "ibp2", "ibp3_x", "ibp3_rho"], &table))?;
    let closed = (hardy.closed_form_lhs - 0.5).abs().max((hardy.closed_form_rhs - 1.0).abs());
    let checks = vec![
        CheckResult::within("carleman.split", order(coarse.split_residual, fine.split_residual), 1.7, 2.3, "order of the split residual"),
        CheckResult::at_most("carleman.i1", fine.i1_gap, p.gap_tol, "relative gap at the finest level"),
        CheckResult::at_most("carleman.ibp", ibp_gap, p.gap_tol, "worst relative gap at the finest level"),
        CheckResult::within("carleman.ibp-order", ibp_worst, 1.7, 2.3, format!("orders {ibp_orders:?}")),
        CheckResult::at_most("hardy.ratio", hardy.max_constant, 4.0 * 1.05, format!("{} profiles", hardy.profiles)),
        CheckResult::at_most("hardy.closed-form", closed, 1e-2, "s e^-s against (1/2, 1)"),
    ];
    finish("identities", s, art, checks, json!({ "levels": levels, "hardy": hardy }))
}
