//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use platelab_core::baselines::{standard_lemma_params, standard_sweep, Baselines, SCAN_RADII};
use platelab_core::carleman::*;
use platelab_core::conformal::{build_map, certify, BoundaryGraph};
use platelab_core::doubling::*;
use platelab_core::field::{GridSpec, ScalarField};
use platelab_core::poly::Poly;
use platelab_core::reflection::{extend, extend_with_tol, reflection_identity_relative, symbolic, trace_residuals};
use platelab_core::solver::{convergence_study, ManufacturedCase};
use platelab_core::{Execution, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<(bool, String)>;

fn upper(h: f64) -> GridSpec {
    GridSpec::with_spacing((-1.0, 1.0), (0.0, 1.0), h).unwrap()
}

fn order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

fn reflection_identity() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let polys: Vec<Poly> = (0..25).map(|_| Poly::random_clamped(&mut rng, 4)).collect();
    let exact = polys.iter().all(|u| u.degree() <= 6 && symbolic::identity_gap(u).is_zero());
    let gap = |u: &Poly, n: f64| -> Result<f64> {
        let f = ScalarField::from_fn(&upper(1.0 / n), |x, y| u.eval(x, y));
        reflection_identity_relative(&extend_with_tol(&f, 1e-3 * f.max_abs())?)
    };
    let (mut worst_gap, mut worst_order) = (0.0_f64, f64::INFINITY);
    for u in &polys[..5] {
        let gs = [gap(u, 32.0)?, gap(u, 64.0)?, gap(u, 128.0)?];
        worst_gap = worst_gap.max(gs[2]);
        // the finest pair sits on the rounding floor of the six-derivative chain
        worst_order = worst_order.min(order(gs[0], gs[1]));
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        exact && worst_gap <= 5e-3 && worst_order >= 1.8 && secs < 60.0,
        format!("symbolic exact on 25: {exact}; gap {worst_gap:.2e} at h=1/128; order {worst_order:.2}; {secs:.1}s"),
    ))
}

fn trace_vanishing() -> Verdict {
    let cases: [(&str, fn(f64, f64) -> f64); 4] = [
        ("y2-sin2x", |x, y| y * y * (2.0 * x).sin() * (1.0 + y)),
        ("y2-sinpix", |x, y| y * y * (PI * x).sin()),
        ("y3", |_, y| y * y * y),
        ("reference", |x, y| reference_exact(x, y).0),
    ];
    let mut worst = 0.0_f64;
    for h in [1.0 / 32.0, 1.0 / 64.0] {
        for (_, f) in cases {
            let u = ScalarField::from_fn(&upper(h), f);
            let t = trace_residuals(&extend(&u)?)?;
            worst = worst.max(t.max() / (h * h * u.max_abs()));
        }
    }
    Ok((worst <= 5.0, format!("max residual / (h^2 |u|) = {worst:.3} over {} cases", cases.len())))
}

fn hardy() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let s_max = rng.random_range(1.0..10.0);
        let modes: Vec<(f64, f64)> =
            (1..=rng.random_range(1..6)).map(|k| (k as f64, rng.random_range(-1.0..1.0))).collect();
        let f = hardy_sample(|s| modes.iter().map(|(k, c)| c * (k * PI * s / s_max).sin()).sum(), s_max, 4001);
        worst = worst.max(hardy_check(&f, s_max)?.constant);
    }
    let c = hardy_check(&hardy_sample(|s| s * (-s).exp(), 40.0, 40_001), 40.0)?;
    let closed = (c.lhs - 0.5).abs() <= 5e-3 && (c.rhs - 1.0).abs() <= 1e-2;
    Ok((
        worst <= 4.0 * 1.05 && closed,
        format!("max constant {worst:.4} on 100 profiles; s e^-s gives ({:.5}, {:.5})", c.lhs, c.rhs),
    ))
}

fn bump(z: f64) -> f64 {
    if z.abs() < 1.0 { (-1.0 / (1.0 - z * z)).exp() } else { 0.0 }
}

fn cylinder(h: f64) -> CylinderGrid {
    let n = (4.0 / h).round() as usize + 1;
    CylinderGrid::new(-((n - 1) as f64) * h, 0.0, n, (2.0 * PI / h).round() as usize).unwrap()
}

fn annulus(x: f64, y: f64) -> f64 {
    let z = (x.hypot(y) - 0.55) / 0.35;
    if z.abs() < 1.0 { (1.0 - z * z).powi(8) * (1.0 + 0.3 * x) } else { 0.0 }
}

fn identities() -> Verdict {
    let w = CarlemanWeight::main();
    let chi = |t: f64| bump((t + 2.0) / 1.2);
    let mut split = Vec::new();
    let mut i1 = Vec::new();
    for n in [64.0, 128.0] {
        let g = cylinder(2.0 * PI / n);
        split.push(conjugate_split(&CylinderField::from_fn(&g, |t, th| chi(t) * (1.0 + th.sin())), 3.0, &w)?.residual);
        i1.push(commutator_i1_check(&CylinderField::from_fn(&g, |t, th| chi(t) * th.sin()), 2.0, &w)?.relative_gap);
    }
    let mut ibp = Vec::new();
    for n in [64.0, 128.0] {
        let g = GridSpec::with_spacing((-1.0, 1.0), (-1.0, 1.0), 1.0 / n)?;
        let u = ScalarField::from_fn(&g, annulus);
        let one = ScalarField::constant(&g, 1.0);
        let x1 = ScalarField::from_fn(&g, |x, _| x);
        let singular = ScalarField::from_fn(&g, |x, y| w.rho(x, y).map(|r| r.powi(-3)).unwrap_or(0.0))
            .with_mask(punctured_mask(&g, 0.1))?;
        let row = [
            ibp_identity_check(&one, &u, IbpIdentity::First)?.relative_gap,
            ibp_identity_check(&singular, &u, IbpIdentity::Second)?.relative_gap,
            ibp_identity_check(&x1, &u, IbpIdentity::Third)?.relative_gap,
            ibp_identity_check(&singular, &u, IbpIdentity::Third)?.relative_gap,
        ];
        ibp.push(row);
    }
    let split_order = order(split[0], split[1]);
    let ibp_gap = ibp[1].iter().copied().fold(0.0, f64::max);
    let ibp_orders: Vec<f64> = ibp[0].iter().zip(&ibp[1]).map(|(a, b)| order(*a, *b)).collect();
    let ibp_ok = ibp_gap <= 0.02 && ibp_orders.iter().all(|o| (1.7..=2.3).contains(o));
    // the discrete commutator identity holds to rounding, so it has no order to read
    let pass = split_order >= 1.75 && i1[1] <= 0.02 && ibp_ok;
    Ok((
        pass,
        format!(
            "split order {split_order:.2}; I1 gap {:.2e}; identity gaps max {ibp_gap:.2e} orders {:?}",
            i1[1],
            ibp_orders.iter().map(|o| format!("{o:.2}")).collect::<Vec<_>>()
        ),
    ))
}

fn carleman_ratio(committed: &Baselines) -> Verdict {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    for (kind, baseline) in [
        (EstimateKind::Bilaplacian, committed.carleman_bilaplacian_max_q),
        (EstimateKind::Laplace { epsilon: 0.5 }, committed.carleman_laplace_max_q),
    ] {
        let cfg = standard_sweep(kind);
        let family = cfg.family();
        let q = ratio_sweep(&family, &cfg, Execution::Parallel)?.max_q();
        let q2 = ratio_sweep(&family, &cfg.refined(), Execution::Parallel)?.max_q();
        let change = (q - q2).abs() / q2;
        pass &= q.is_finite() && change < 0.1 && q <= baseline * 1.1 && family.len() >= 20;
        lines.push(format!("{kind:?} max Q {q:.4} (h/2: {q2:.4}, change {:.1}%, baseline {baseline:.4})", 100.0 * change));
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((pass && secs < 600.0, format!("{}; {secs:.1}s", lines.join("; "))))
}

fn doubling() -> Verdict {
    let g = GridSpec::with_spacing((-1.0, 1.0), (0.0, 1.0), 1.0 / 256.0)?;
    let mut worst = 0.0_f64;
    for (f, target) in [(&(|_: f64, y: f64| y * y) as &dyn Fn(f64, f64) -> f64, 64.0), (&|x: f64, y: f64| y * y * (y - 3.0 * x), 256.0)] {
        let v = ScalarField::from_fn(&g, f);
        let scan = doubling_scan(&v, (0.0, 0.0), 1.0, 2.0, Execution::Parallel)?;
        for d in &scan.ratios {
            worst = worst.max((d / target - 1.0).abs());
        }
    }
    let u = reference_solution(0.5, 1.0 / 256.0)?;
    let ds = SCAN_RADII.iter().map(|r| doubling_ratio(&u, (0.0, 0.0), *r)).collect::<Result<Vec<_>>>()?;
    let var = ds.iter().copied().fold(f64::MIN, f64::max) / ds.iter().copied().fold(f64::MAX, f64::min) - 1.0;
    Ok((
        worst <= 0.03 && var <= 0.1,
        format!("homogeneous worst deviation {:.2}%; FD solution variation {:.2}% over r in [1/16, 1/4]", 100.0 * worst, 100.0 * var),
    ))
}

fn lemma_chain() -> Verdict {
    let p = standard_lemma_params();
    let coarse = reference_solution(0.5, 1.0 / 128.0)?;
    let fine = reference_solution(0.5, 1.0 / 256.0)?;
    let a = lemma_terms_audit(&coarse, &p, Execution::Parallel)?.c_hat_max;
    let b = lemma_terms_audit(&fine, &p, Execution::Parallel)?.c_hat_max;
    let change = (a - b).abs() / b;
    let taus: Vec<f64> = (4..=20).map(f64::from).collect();
    let c1 = doubling_chain(&fine, 0.04, 0.4, &taus, Execution::Parallel)?;
    let c2 = doubling_chain(&fine, 0.04, 0.4, &taus, Execution::Sequential)?;
    let stable = c1.ln_bound.to_bits() == c2.ln_bound.to_bits();
    let t0 = tau0_select(3.0, 1.0, 1.0, 80.0, 1.0)?;
    let hand = (t0 - (3.0 + 320f64.ln() / 4f64.ln())).abs() <= 1e-6 && (t0 - 7.1610).abs() <= 1e-4;
    Ok((
        b.is_finite() && change < 0.15 && c1.holds && c1.form_gap <= 1e-10 && stable && hand,
        format!(
            "C-hat {b:.3e} (change {:.1}%); chain holds {} with form gap {:.1e}, bit-stable {stable}; tau0 {t0:.6}",
            100.0 * change,
            c1.holds,
            c1.form_gap
        ),
    ))
}

fn solver() -> Verdict {
    let grids: Vec<GridSpec> = [16.0, 32.0, 64.0].iter().map(|n| upper(1.0 / n)).collect();
    let rows = convergence_study(ManufacturedCase::SinY2, &grids)?;
    let orders: Vec<f64> = rows.iter().filter_map(|r| r.order).collect();
    let exact = convergence_study(ManufacturedCase::Y2, &grids)?;
    let exact_ok = exact.iter().all(|r| r.exact);
    Ok((
        orders.len() == 2 && orders.iter().all(|o| (1.7..=2.3).contains(o)) && exact_ok,
        format!(
            "y2 sin(pi x) orders {:?}; y2 errors {:?}",
            orders.iter().map(|o| format!("{o:.3}")).collect::<Vec<_>>(),
            exact.iter().map(|r| format!("{:.1e}", r.l2_error)).collect::<Vec<_>>()
        ),
    ))
}

fn conformal() -> Verdict {
    let flat = certify(&build_map(&BoundaryGraph::flat(1.0, 0.5)?, 32)?);
    let flat_worst = [flat.conformality_residual, flat.round_trip, flat.boundary_error, flat.origin_offset, (flat.jacobian_min_det - 1.0).abs()]
        .into_iter()
        .fold(0.0, f64::max);
    let graph = BoundaryGraph::quadratic(0.1, 1.0, 0.5)?;
    let mut res = Vec::new();
    let mut min_det = f64::INFINITY;
    for n in [32, 64, 128] {
        let c = certify(&build_map(&graph, n)?);
        res.push(c.conformality_residual_interior);
        min_det = min_det.min(c.jacobian_min_det);
    }
    let orders = [order(res[0], res[1]), order(res[1], res[2])];
    Ok((
        flat_worst <= 1e-8 && orders.iter().all(|o| (1.8..=2.2).contains(o)) && min_det > 0.0,
        format!("flat worst residual {flat_worst:.1e}; curved orders {:.2}, {:.2}; min det {min_det:.3}", orders[0], orders[1]),
    ))
}

fn scans(committed: &Baselines) -> Verdict {
    let measured = Baselines::measure(Execution::Parallel)?;
    let checks: Vec<_> = measured
        .compare(committed)
        .into_iter()
        .filter(|c| !c.id.starts_with("carleman") && !c.id.starts_with("doubling"))
        .collect();
    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.id.as_str()).collect();
    let g = GridSpec::with_spacing((-1.0, 1.0), (0.0, 1.0), 1.0 / 64.0)?;
    let constant = reverse_holder_ratio(&ScalarField::from_fn(&g, |_, y| y * y * y), 0.0, 0.5, 6.0)?;
    Ok((
        failed.is_empty() && constant == 1.0,
        format!("{} baselined constants, failing {failed:?}; constant-trace ratio {constant}", checks.len()),
    ))
}

fn main() -> ExitCode {
    let committed = Baselines::committed().expect("committed baselines parse");
    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict>)> = vec![
        ("reflection-identity", Box::new(reflection_identity)),
        ("trace-vanishing", Box::new(trace_vanishing)),
        ("hardy", Box::new(hardy)),
        ("conjugation-commutator-ibp", Box::new(identities)),
        ("carleman-ratio", Box::new(|| carleman_ratio(&committed))),
        ("doubling-scaling", Box::new(doubling)),
        ("lemma-audit-chain", Box::new(lemma_chain)),
        ("solver-convergence", Box::new(solver)),
        ("conformal-certification", Box::new(conformal)),
        ("scan-baselines", Box::new(|| scans(&committed))),
    ];
    let mut failures = 0;
    for (k, (id, run)) in criteria.iter().enumerate() {
        let (pass, detail) = run().unwrap_or_else(|e| (false, format!("error {e}")));
        failures += usize::from(!pass);
        println!("{} {:>2} {id}: {detail}", if pass { "PASS" } else { "FAIL" }, k + 1);
    }
    if failures == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
