use std::collections::HashMap;

use ndarray::Array2;

use super::stencil::{unit_weights, window, Accuracy};
use super::ScalarField;
use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Axis {
    X,
    Y,
}

/// `∂x^a ∂y^b f` with second-order stencils: centered where the stencil
/// fits inside the mask, shifted one-sided windows near mask edges.
pub fn derive(f: &ScalarField, order: (usize, usize)) -> Result<ScalarField> {
    derive_with(f, order, Accuracy::Second)
}

/// As [`derive`] with a chosen accuracy. The x-derivative is applied first,
/// then the y-derivative, so mixed derivatives of polynomials commute exactly.
pub fn derive_with(f: &ScalarField, order: (usize, usize), acc: Accuracy) -> Result<ScalarField> {
    let (a, b) = order;
    if a + b > 4 {
        return Err(Error::usage(format!("derivative order {a}+{b} exceeds 4")));
    }
    let mut out = f.clone();
    if a > 0 {
        out = derive_axis(&out, Axis::X, a, acc)?;
    }
    if b > 0 {
        out = derive_axis(&out, Axis::Y, b, acc)?;
    }
    Ok(out)
}

fn derive_axis(f: &ScalarField, axis: Axis, k: usize, acc: Accuracy) -> Result<ScalarField> {
    let g = *f.grid();
    let mask = f.mask();
    let (outer, inner) = match axis {
        Axis::X => (g.ny, g.nx),
        Axis::Y => (g.nx, g.ny),
    };
    let at = |line: usize, pos: usize| -> (usize, usize) {
        match axis {
            Axis::X => (pos, line),
            Axis::Y => (line, pos),
        }
    };
    let scale = g.h.powi(-(k as i32));
    let mut cache: HashMap<(isize, usize), Vec<f64>> = HashMap::new();
    let mut out = Array2::zeros(g.shape());
    let vals = f.values();
    for line in 0..outer {
        let mut pos = 0;
        while pos < inner {
            let (i, j) = at(line, pos);
            if !mask.get(i, j) {
                pos += 1;
                continue;
            }
            let run_start = pos;
            while pos < inner && {
                let (i, j) = at(line, pos);
                mask.get(i, j)
            } {
                pos += 1;
            }
            let run_len = pos - run_start;
            for p in 0..run_len {
                let (i, j) = at(line, run_start + p);
                let (start, n) =
                    window(p, run_len, k, acc).ok_or(Error::StencilOutOfDomain { i, j, order: k })?;
                let w = cache.entry((start, n)).or_insert_with(|| unit_weights(start, n, k));
                let mut acc_v = 0.0;
                for (q, wq) in w.iter().enumerate() {
                    let (ii, jj) = at(line, (run_start as isize + p as isize + start + q as isize) as usize);
                    acc_v += wq * vals[[jj, ii]];
                }
                out[[j, i]] = acc_v * scale;
            }
        }
    }
    Ok(ScalarField::from_parts(g, out, mask.clone()))
}

pub fn laplacian(f: &ScalarField) -> Result<ScalarField> {
    derive(f, (2, 0))?.add(&derive(f, (0, 2))?)
}

/// `Δ²f` assembled from the pure fourth derivatives (no nested Laplacians).
pub fn bilaplacian(f: &ScalarField) -> Result<ScalarField> {
    ScalarField::combine(&[
        (1.0, &derive(f, (4, 0))?),
        (2.0, &derive(f, (2, 2))?),
        (1.0, &derive(f, (0, 4))?),
    ])
}

pub fn gradient(f: &ScalarField) -> Result<[ScalarField; 2]> {
    Ok([derive(f, (1, 0))?, derive(f, (0, 1))?])
}

/// All derivatives of total order `k`, listed as `(a, b, ∂x^a ∂y^b f)` with
/// `a` descending.
pub fn all_of_order(f: &ScalarField, k: usize) -> Result<Vec<(usize, usize, ScalarField)>> {
    (0..=k).rev().map(|a| Ok((a, k - a, derive(f, (a, k - a))?))).collect()
}

/// `|D^k f|²` as the full tensor norm: each `(a, b)` slot appears
/// `binomial(k, a)` times among the `2^k` ordered partials.
pub fn tensor_norm_sq(parts: &[(usize, usize, ScalarField)]) -> Result<ScalarField> {
    let terms: Vec<(f64, ScalarField)> = parts
        .iter()
        .map(|(a, b, d)| (binomial(a + b, *a), d.map(|v| v * v)))
        .collect();
    let refs: Vec<(f64, &ScalarField)> = terms.iter().map(|(c, f)| (*c, f)).collect();
    ScalarField::combine(&refs)
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{GridSpec, Mask};

    fn grid(n: usize) -> GridSpec {
        GridSpec::new((-1.0, 1.0), (-1.0, 1.0), n, n).unwrap()
    }

    #[test]
    fn mixed_derivative_of_x2y() {
        let g = grid(21);
        let f = ScalarField::from_fn(&g, |x, y| x * x * y);
        let d = derive(&f, (1, 1)).unwrap();
        let exact = ScalarField::from_fn(&g, |x, _| 2.0 * x);
        assert!(d.sub(&exact).unwrap().max_abs() <= 1e-10);
    }

    #[test]
    fn constants_are_annihilated() {
        let g = grid(13);
        let f = ScalarField::constant(&g, 3.7);
        for order in [(1, 0), (0, 1), (2, 0), (1, 1), (0, 3), (2, 2), (4, 0)] {
            assert!(derive(&f, order).unwrap().max_abs() < 1e-8, "{order:?}");
        }
    }

    #[test]
    fn second_order_convergence() {
        let err = |n: usize| {
            let g = grid(n);
            let f = ScalarField::from_fn(&g, |x, y| x.sin() * y.cos());
            let d = derive(&f, (2, 0)).unwrap();
            let exact = ScalarField::from_fn(&g, |x, y| -x.sin() * y.cos());
            d.sub(&exact).unwrap().max_abs()
        };
        let ratio = err(41) / err(81);
        assert!((3.6..4.4).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn short_runs_are_rejected_with_index() {
        let g = grid(11);
        let mask = Mask::from_fn(&g, |x, _| x <= -0.7);
        let f = ScalarField::from_fn(&g, |x, _| x).with_mask(mask).unwrap();
        let e = derive(&f, (4, 0)).unwrap_err();
        assert_eq!(e.id(), "stencil-out-of-domain");
    }

    #[test]
    fn tensor_norm_counts_multiplicities() {
        let g = grid(11);
        // u = x y: D²u has two off-diagonal entries equal to 1
        let f = ScalarField::from_fn(&g, |x, y| x * y);
        let n2 = tensor_norm_sq(&all_of_order(&f, 2).unwrap()).unwrap();
        assert!((n2.at(5, 5) - 2.0).abs() < 1e-10);
    }
}
