//! Finite-difference weights on arbitrary 1-D node sets (Fornberg's
//! recursion) and the window-placement rule used by [`super::derive`].

use serde::{Deserialize, Serialize};

/// Formal accuracy order of the derivative stencils.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Accuracy {
    #[default]
    Second,
    Fourth,
}

impl Accuracy {
    pub fn order(self) -> usize {
        match self {
            Accuracy::Second => 2,
            Accuracy::Fourth => 4,
        }
    }
}

/// Weights `w` with `f^(m)(z) ~ sum w_k f(x_k)`.
pub fn fornberg(z: f64, x: &[f64], m: usize) -> Vec<f64> {
    let n = x.len();
    assert!(n > m, "need more nodes than the derivative order");
    // c[k][d]: weight of node k for derivative d.
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// Number of points of the centered stencil for derivative order `k`.
pub fn centered_len(k: usize, acc: Accuracy) -> usize {
    2 * k.div_ceil(2) - 1 + acc.order()
}

/// Number of points of the one-sided stencil for derivative order `k`.
pub fn one_sided_len(k: usize, acc: Accuracy) -> usize {
    k + acc.order()
}

/// Start offset (relative to `pos`) and length of the stencil used at
/// position `pos` of a run `[0, len)`; `None` if the run is too short.
pub fn window(pos: usize, len: usize, k: usize, acc: Accuracy) -> Option<(isize, usize)> {
    let nc = centered_len(k, acc);
    let half = (nc / 2) as isize;
    let p = pos as isize;
    if p - half >= 0 && p + half < len as isize {
        return Some((-half, nc));
    }
    let n = one_sided_len(k, acc);
    if n > len {
        return None;
    }
    let start = (p - (n as isize - 1) / 2).clamp(0, (len - n) as isize);
    Some((start - p, n))
}

/// Integer-offset stencil weights scaled to unit spacing.
pub fn unit_weights(start: isize, n: usize, k: usize) -> Vec<f64> {
    let nodes: Vec<f64> = (0..n).map(|q| (start + q as isize) as f64).collect();
    fornberg(0.0, &nodes, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_centered_weights() {
        let w = unit_weights(-1, 3, 2);
        assert_eq!(w, vec![1.0, -2.0, 1.0]);
        let w = unit_weights(-2, 5, 4);
        for (a, b) in w.iter().zip([1.0, -4.0, 6.0, -4.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let w = unit_weights(0, 3, 1);
        for (a, b) in w.iter().zip([-1.5, 2.0, -0.5]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn window_rules() {
        assert_eq!(window(5, 20, 2, Accuracy::Second), Some((-1, 3)));
        assert_eq!(window(0, 20, 2, Accuracy::Second), Some((0, 4)));
        assert_eq!(window(19, 20, 1, Accuracy::Second), Some((-2, 3)));
        assert_eq!(window(1, 20, 4, Accuracy::Second), Some((-1, 6)));
        assert_eq!(window(0, 4, 3, Accuracy::Second), None);
    }

    #[test]
    fn weights_are_exact_on_polynomials() {
        for k in 1..=4 {
            for start in -3..=0 {
                let n = one_sided_len(k, Accuracy::Second);
                let w = unit_weights(start, n, k);
                // exact for degree < n
                for deg in 0..n {
                    let approx: f64 = (0..n)
                        .map(|q| w[q] * ((start + q as isize) as f64).powi(deg as i32))
                        .sum();
                    let exact = if deg == k { (1..=k).product::<usize>() as f64 } else { 0.0 };
                    assert!((approx - exact).abs() < 1e-9, "k={k} start={start} deg={deg}");
                }
            }
        }
    }
}
