use std::f64::consts::PI;

use platelab_core::carleman::*;
use platelab_core::field::{GridSpec, ScalarField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn bump(z: f64) -> f64 {
    if z.abs() < 1.0 { (-1.0 / (1.0 - z * z)).exp() } else { 0.0 }
}

fn cyl(h: f64) -> CylinderGrid {
    let n = (4.0 / h).round() as usize + 1;
    CylinderGrid::new(-((n - 1) as f64) * h, 0.0, n, (2.0 * PI / h).round() as usize).unwrap()
}

fn chi(t: f64) -> f64 {
    bump((t + 2.0) / 1.2)
}

// polynomial annulus bump, supported in 0.2 < |x| < 0.9
fn annulus(x: f64, y: f64) -> f64 {
    let z = (x.hypot(y) - 0.55) / 0.35;
    if z.abs() < 1.0 { (1.0 - z * z).powi(8) * (1.0 + 0.3 * x) } else { 0.0 }
}

#[test]
fn conjugate_split_second_order() {
    let w = CarlemanWeight::main();
    let mut prev: Option<f64> = None;
    for h in [2.0 * PI / 64.0, 2.0 * PI / 128.0, 2.0 * PI / 256.0] {
        let g = cyl(h);
        let f = CylinderField::from_fn(&g, |t, th| chi(t) * (1.0 + th.sin()));
        let s = conjugate_split(&f, 3.0, &w).unwrap();
        assert!(conjugate_split(&f, 0.0, &w).unwrap().a_tau.max_abs() == 0.0);
        if let Some(p) = prev {
            let order = (p / s.residual).log2();
            assert!(order > 1.75, "order {order}");
        }
        prev = Some(s.residual);
    }
}

#[test]
fn commutator_identity_scales_with_tau() {
    let w = CarlemanWeight::main();
    let g = cyl(2.0 * PI / 128.0);
    let f = CylinderField::from_fn(&g, |t, th| chi(t) * th.sin());
    let c = commutator_i1_check(&f, 2.0, &w).unwrap();
    let c2 = commutator_i1_check(&f, 4.0, &w).unwrap();
    assert!(c.relative_gap <= 0.02, "{c:?}");
    assert!((c2.lhs / c.lhs - 2.0).abs() < 1e-12 && (c2.rhs / c.rhs - 2.0).abs() < 1e-12);
    // θ-independent profiles have no commutator contribution
    let flat = CylinderField::from_fn(&g, |t, _| chi(t));
    let z = commutator_i1_check(&flat, 2.0, &w).unwrap();
    assert!(z.lhs.abs() < 1e-12 && z.rhs.abs() < 1e-12);
}

#[test]
fn ibp_identities_second_order() {
    let w = CarlemanWeight::main();
    let mut gaps = Vec::new();
    for n in [64.0, 128.0] {
        let g = GridSpec::with_spacing((-1.0, 1.0), (-1.0, 1.0), 1.0 / n).unwrap();
        let u = ScalarField::from_fn(&g, annulus);
        let one = ScalarField::constant(&g, 1.0);
        let x1 = ScalarField::from_fn(&g, |x, _| x);
        let singular = ScalarField::from_fn(&g, |x, y| w.rho(x, y).map(|r| r.powi(-3)).unwrap_or(0.0))
            .with_mask(punctured_mask(&g, 0.1))
            .unwrap();
        let row: Vec<f64> = [
            (&one, IbpIdentity::First),
            (&singular, IbpIdentity::First),
            (&singular, IbpIdentity::Second),
            (&x1, IbpIdentity::Third),
            (&singular, IbpIdentity::Third),
        ]
        .into_iter()
        .map(|(z, k)| ibp_identity_check(z, &u, k).unwrap().relative_gap)
        .collect();
        gaps.push(row);
    }
    for (coarse, fine) in gaps[0].iter().zip(&gaps[1]) {
        assert!(*fine <= 0.02, "gap {fine}");
        let order = (coarse / fine).log2();
        assert!((1.7..=2.3).contains(&order), "order {order}");
    }
}

#[test]
fn ibp_rejects_support_near_edge() {
    let g = GridSpec::with_spacing((-1.0, 1.0), (-1.0, 1.0), 1.0 / 32.0).unwrap();
    let u = ScalarField::from_fn(&g, |x, _| x);
    let one = ScalarField::constant(&g, 1.0);
    let e = ibp_identity_check(&one, &u, IbpIdentity::First).unwrap_err();
    assert_eq!(e.id(), "support-violation");
}

#[test]
fn hardy_random_profiles() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..100 {
        let s_max = rng.random_range(1.0..10.0);
        let modes: Vec<(f64, f64)> = (1..=rng.random_range(1..6))
            .map(|k| (k as f64, rng.random_range(-1.0..1.0)))
            .collect();
        let f = hardy_sample(|s| modes.iter().map(|(k, c)| c * (k * PI * s / s_max).sin()).sum(), s_max, 4001);
        let c = hardy_check(&f, s_max).unwrap();
        assert!(c.pass && c.constant <= 4.0 * (1.0 + HARDY_SLACK), "{c:?}");
    }
    let c = hardy_check(&hardy_sample(|s| s * (-s).exp(), 40.0, 40_001), 40.0).unwrap();
    assert!((c.lhs - 0.5).abs() <= 5e-3 && (c.rhs - 1.0).abs() <= 1e-2, "{c:?}");
}
