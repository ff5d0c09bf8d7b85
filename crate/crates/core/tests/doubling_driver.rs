use platelab_core::baselines::{standard_lemma_params, SCAN_RADII};
use platelab_core::doubling::*;
use platelab_core::field::{GridSpec, ScalarField};
use platelab_core::Execution;

const ORIGIN: (f64, f64) = (0.0, 0.0);

fn solutions() -> (ScalarField, ScalarField) {
    (reference_solution(0.5, 1.0 / 128.0).unwrap(), reference_solution(0.5, 1.0 / 256.0).unwrap())
}

#[test]
fn reference_solution_matches_closed_form() {
    let h = 1.0 / 64.0;
    let u = reference_solution(0.5, h).unwrap();
    let g = u.grid();
    let mut err: f64 = 0.0;
    for i in 0..g.nx {
        for j in 0..g.ny {
            err = err.max((u.at(i, j) - reference_exact(g.x(i), g.y(j)).0).abs());
        }
    }
    assert!(err <= 50.0 * h * h * u.max_abs(), "{err:e}");
}

#[test]
fn fd_solution_doubling_is_scale_independent() {
    let (_, fine) = solutions();
    let ds: Vec<f64> = SCAN_RADII.iter().map(|r| doubling_ratio(&fine, ORIGIN, *r).unwrap()).collect();
    let hi = ds.iter().copied().fold(f64::MIN, f64::max);
    let lo = ds.iter().copied().fold(f64::MAX, f64::min);
    assert!(hi / lo - 1.0 <= 0.10, "{ds:?}");
    let scan = doubling_scan(&fine, ORIGIN, 0.5, 2.0, Execution::Parallel).unwrap();
    assert!(scan.variation() <= 0.10);
    assert!(scan.frequency.is_finite() && scan.frequency > 1.0);
}

#[test]
fn lemma_constant_is_grid_stable() {
    let (coarse, fine) = solutions();
    let p = standard_lemma_params();
    let a = lemma_terms_audit(&coarse, &p, Execution::Parallel).unwrap().c_hat_max;
    let b = lemma_terms_audit(&fine, &p, Execution::Parallel).unwrap().c_hat_max;
    assert!(a.is_finite() && b.is_finite() && b > 0.0);
    assert!((a - b).abs() / b < 0.15, "{a:e} {b:e}");
}

#[test]
fn chain_holds_and_is_bit_stable() {
    let (_, fine) = solutions();
    let taus: Vec<f64> = (4..=20).map(f64::from).collect();
    let a = doubling_chain(&fine, 0.04, 0.4, &taus, Execution::Parallel).unwrap();
    let b = doubling_chain(&fine, 0.04, 0.4, &taus, Execution::Sequential).unwrap();
    assert!(a.holds && a.absorption_holds && a.tau0_in_range);
    assert!(a.form_gap <= 1e-10);
    assert_eq!(a.ln_c_prime.to_bits(), b.ln_c_prime.to_bits());
    assert_eq!(a.ln_bound.to_bits(), b.ln_bound.to_bits());
}

#[test]
fn low_order_caccioppoli_constants_are_stable() {
    let (_, fine) = solutions();
    let s = caccioppoli_scan(&fine, ORIGIN, &SCAN_RADII, 6, Execution::Parallel).unwrap();
    for h in 1..=2 {
        assert!(s.variation(h) < 0.2, "order {h}: {}", s.variation(h));
    }
    for h in 1..=6 {
        assert!(s.max_for(h).is_finite());
    }
}

#[test]
fn reverse_holder_is_bounded_and_exact_on_constant_trace() {
    let (_, fine) = solutions();
    for row in reverse_holder_scan(&fine, 0.0, 0.25, 4.0).unwrap() {
        assert!(row.ratio >= 1.0 - 1e-12 && row.ratio < 1.1, "{row:?}");
    }
    let g = GridSpec::with_spacing((-1.0, 1.0), (0.0, 1.0), 1.0 / 64.0).unwrap();
    let cubic = ScalarField::from_fn(&g, |_, y| y * y * y);
    assert_eq!(reverse_holder_ratio(&cubic, 0.0, 0.5, 6.0).unwrap(), 1.0);
}
