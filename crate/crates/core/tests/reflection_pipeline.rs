use platelab_core::field::{GridSpec, ScalarField};
use platelab_core::poly::Poly;
use platelab_core::reflection::{extend, extend_with_tol, reflection_identity_relative, symbolic, trace_residuals};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn upper(h: f64) -> GridSpec {
    GridSpec::with_spacing((-1.0, 1.0), (0.0, 1.0), h).unwrap()
}

fn gap(u: &Poly, h: f64) -> f64 {
    let f = ScalarField::from_fn(&upper(h), |x, y| u.eval(x, y));
    reflection_identity_relative(&extend_with_tol(&f, 1e-3 * f.max_abs()).unwrap()).unwrap()
}

#[test]
fn fd_gap_and_order_on_random_sextics() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..5 {
        let u = Poly::random_clamped(&mut rng, 4);
        assert!(symbolic::identity_gap(&u).is_zero());
        let gs: Vec<f64> = [32.0, 64.0, 128.0].iter().map(|n| gap(&u, 1.0 / n)).collect();
        println!("{gs:?}");
        // past h = 1/64 the h⁻⁶ rounding floor of the six-derivative chain
        // dominates, so the order is read on the coarser pair
        let order = (gs[0] / gs[1]).log2();
        assert!(gs[2] <= 5e-3);
        assert!(order >= 1.8);
    }
}

#[test]
fn traces_are_second_order_for_manufactured_clamped() {
    for h in [1.0 / 32.0, 1.0 / 64.0] {
        let f = ScalarField::from_fn(&upper(h), |x, y| y * y * (2.0 * x).sin() * (1.0 + y));
        let t = trace_residuals(&extend(&f).unwrap()).unwrap();
        println!("{h} {t:?}");
        assert!(t.max() <= 5.0 * h * h * f.max_abs());
    }
}
