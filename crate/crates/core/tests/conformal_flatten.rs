use platelab_core::conformal::*;
use platelab_core::field::ScalarField;

fn interior_max(f: &ScalarField) -> f64 {
    let r = *f.grid();
    let mut m: f64 = 0.0;
    for j in 0..r.ny {
        for i in 0..r.nx {
            if r.x(i).abs() <= 0.75 {
                m = m.max(f.at(i, j).abs());
            }
        }
    }
    m
}

#[test]
fn curved_map_certifies() {
    let graph = BoundaryGraph::quadratic(0.1, 1.0, 0.5).unwrap();
    let mut residuals = Vec::new();
    let mut drift_peaks = Vec::new();
    for n in [32, 64, 128] {
        let map = build_map(&graph, n).unwrap();
        let c = certify(&map);
        assert!(c.jacobian_min_det > 0.0, "{c:?}");
        assert!(c.round_trip <= 1e-10 && c.origin_offset <= 1e-10 && c.boundary_error <= 1e-10, "{c:?}");
        assert!(c.ratio_max / c.ratio_min <= 3.0, "{c:?}");
        residuals.push(c.conformality_residual_interior);

        let pg = graph.physical_grid(1.0 / (2 * n) as f64).unwrap();
        let v = ScalarField::from_fn(&pg, |x, y| (y - graph.g(x)).powi(2));
        let u = pullback_solution(&map, &v).unwrap();
        let r = map.rect();
        let h = r.h;
        for i in 0..r.nx {
            let slope = (-3.0 * u.at(i, 0) + 4.0 * u.at(i, 1) - u.at(i, 2)) / (2.0 * h);
            assert!(u.at(i, 0).abs() <= h * v.max_abs() && slope.abs() <= h * v.max_abs());
        }
        let tilde = [ScalarField::from_fn(&pg, |x, _| 0.5 * x), ScalarField::constant(&pg, 1.0)];
        let a = transformed_drift(&map, &tilde).unwrap();
        assert!(a.iter().all(|f| f.values().iter().all(|v| v.is_finite())));
        drift_peaks.push(interior_max(&a[0]).max(interior_max(&a[1])));
    }
    for w in residuals.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((1.8..=2.2).contains(&order), "order {order} from {residuals:?}");
    }
    let change = (drift_peaks[2] - drift_peaks[1]).abs() / drift_peaks[2];
    assert!(change < 0.1, "{drift_peaks:?}");
}

#[test]
fn flat_drift_vanishes() {
    let graph = BoundaryGraph::flat(1.0, 0.5).unwrap();
    let map = build_map(&graph, 16).unwrap();
    let pg = graph.physical_grid(1.0 / 16.0).unwrap();
    let zero = [ScalarField::zeros(&pg), ScalarField::zeros(&pg)];
    let a = transformed_drift(&map, &zero).unwrap();
    assert!(a[0].max_abs() <= 1e-8 && a[1].max_abs() <= 1e-8);
    let c = certify(&map);
    assert!(c.ratio_samples < map.rect().len());
}

#[test]
fn map_dump_has_every_node() {
    let map = build_map(&BoundaryGraph::quadratic(0.05, 1.0, 0.5).unwrap(), 8).unwrap();
    let csv = map.to_csv();
    assert_eq!(csv.lines().count(), 1 + map.rect().len());
    assert!(csv.starts_with("eta1,eta2,phi1,phi2"));
}
