//! Compressed-row matrices, a banded LU factorization with partial pivoting
//! and a Jacobi-preconditioned BiCGSTAB.

use crate::error::{Error, Result};
use crate::field::NeumaierSum;

/// Square matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Csr {
    /// Builds from per-row `(column, value)` lists; duplicate columns in a row
    /// are summed and rows are sorted by column.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut r in rows {
            r.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (c, v) in r {
                debug_assert!(c < n);
                if last == Some(c) {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|e| e.0 == j).map_or(0.0, |e| e.1)
    }

    /// `(lower, upper)` bandwidth.
    pub fn bandwidth(&self) -> (usize, usize) {
        let mut kl = 0;
        let mut ku = 0;
        for i in 0..self.n {
            for (c, _) in self.row(i) {
                if c < i {
                    kl = kl.max(i - c);
                } else {
                    ku = ku.max(c - i);
                }
            }
        }
        (kl, ku)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(c, v)| v * x[c]).sum()).collect()
    }

    /// True if the sparsity pattern is structurally symmetric.
    pub fn pattern_symmetric(&self) -> bool {
        (0..self.n).all(|i| self.row(i).all(|(c, _)| self.row(c).any(|(cc, _)| cc == i)))
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).collect::<NeumaierSum>().total().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).collect::<NeumaierSum>().total()
}

/// LU factors of a banded matrix, stored row-wise with room for the fill-in
/// produced by row interchanges (the layout of LAPACK's `gbtrf`, transposed).
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    #[inline]
    fn idx(&self, i: usize, c: usize) -> usize {
        // row i stores columns i-kl ..= i+ku+kl
        i * self.width + (c + self.kl - i)
    }

    pub fn factor(a: &Csr) -> Result<Self> {
        let n = a.n();
        let (kl, ku) = a.bandwidth();
        let width = 2 * kl + ku + 1;
        let mut lu = Self { n, kl, ku, width, data: vec![0.0; n * width], pivots: vec![0; n] };
        for i in 0..n {
            for (c, v) in a.row(i) {
                let k = lu.idx(i, c);
                lu.data[k] = v;
            }
        }
        let scale = a.vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.data[lu.idx(k, k)].abs();
            for i in k + 1..=last_row {
                let v = lu.data[lu.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= f64::EPSILON * scale * 1e-6 || !best.is_finite() {
                return Err(Error::SingularSystem { column: k });
            }
            lu.pivots[k] = p;
            let last_col = (k + kl + ku).min(n - 1);
            if p != k {
                for c in k..=last_col {
                    let (a_, b_) = (lu.idx(k, c), lu.idx(p, c));
                    lu.data.swap(a_, b_);
                }
            }
            let pivot = lu.data[lu.idx(k, k)];
            let len = last_col - k;
            for i in k + 1..=last_row {
                let ik = lu.idx(i, k);
                let l = lu.data[ik] / pivot;
                lu.data[ik] = l;
                if l == 0.0 {
                    continue;
                }
                let (src_start, dst_start) = (lu.idx(k, k + 1), lu.idx(i, k + 1));
                // rows k < i, so the source lies strictly before the destination
                let (head, tail) = lu.data.split_at_mut(dst_start);
                let src = &head[src_start..src_start + len];
                for (d, s) in tail[..len].iter_mut().zip(src) {
                    *d -= l * s;
                }
            }
        }
        Ok(lu)
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            if xk != 0.0 {
                for i in k + 1..=(k + self.kl).min(n - 1) {
                    x[i] -= self.data[self.idx(i, k)] * xk;
                }
            }
        }
        for i in (0..n).rev() {
            let last = (i + self.kl + self.ku).min(n - 1);
            let mut s = x[i];
            for c in i + 1..=last {
                s -= self.data[self.idx(i, c)] * x[c];
            }
            x[i] = s / self.data[self.idx(i, i)];
        }
        x
    }

    /// Bytes held by the factor storage.
    pub fn storage_bytes(&self) -> usize {
        self.data.len() * std::mem::size_of::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterativeOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// BiCGSTAB with Jacobi preconditioning; stops at `tol` relative residual.
pub fn bicgstab(a: &Csr, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, IterativeOutcome)> {
    let n = a.n();
    let diag: Vec<f64> = (0..n)
        .map(|i| {
            let d = a.get(i, i);
            if d != 0.0 { 1.0 / d } else { 1.0 }
        })
        .collect();
    let precond = |v: &[f64]| -> Vec<f64> { v.iter().zip(&diag).map(|(a, d)| a * d).collect() };
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, IterativeOutcome { iterations: 0, relative_residual: 0.0 }));
    }
    let mut r = b.to_vec();
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for it in 1..=max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for k in 0..n {
            p[k] = r[k] + beta * (p[k] - omega * v[k]);
        }
        let p_hat = precond(&p);
        v = a.matvec(&p_hat);
        alpha = rho / dot(&r_hat, &v);
        let s: Vec<f64> = r.iter().zip(&v).map(|(r, v)| r - alpha * v).collect();
        if norm2(&s) / bnorm < tol {
            for k in 0..n {
                x[k] += alpha * p_hat[k];
            }
            let res = norm2(&sub(b, &a.matvec(&x))) / bnorm;
            return Ok((x, IterativeOutcome { iterations: it, relative_residual: res }));
        }
        let s_hat = precond(&s);
        let t = a.matvec(&s_hat);
        omega = dot(&t, &s) / dot(&t, &t);
        for k in 0..n {
            x[k] += alpha * p_hat[k] + omega * s_hat[k];
            r[k] = s[k] - omega * t[k];
        }
        let res = norm2(&r) / bnorm;
        if res < tol {
            let true_res = norm2(&sub(b, &a.matvec(&x))) / bnorm;
            return Ok((x, IterativeOutcome { iterations: it, relative_residual: true_res }));
        }
        if !res.is_finite() || omega == 0.0 {
            return Err(Error::SolverStagnation { iterations: it, residual: res });
        }
    }
    let res = norm2(&sub(b, &a.matvec(&x))) / bnorm;
    Err(Error::SolverStagnation { iterations: max_iter, residual: res })
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_banded(n: usize, kl: usize, ku: usize, seed: u64, dominant: bool) -> Csr {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..n)
            .map(|i| {
                let lo = i.saturating_sub(kl);
                let hi = (i + ku).min(n - 1);
                (lo..=hi)
                    .map(|c| {
                        let v: f64 = rng.random_range(-1.0..1.0);
                        (c, if c == i && dominant { v + 10.0 } else { v })
                    })
                    .collect()
            })
            .collect();
        Csr::from_rows(rows)
    }

    #[test]
    fn banded_lu_solves_random_systems() {
        for (seed, kl, ku) in [(1, 3, 2), (2, 5, 5), (3, 1, 7)] {
            let a = random_banded(60, kl, ku, seed, false);
            let x_true: Vec<f64> = (0..60).map(|k| (k as f64 * 0.37).sin()).collect();
            let b = a.matvec(&x_true);
            let x = BandedLu::factor(&a).unwrap().solve(&b);
            let err = norm2(&sub(&x, &x_true)) / norm2(&x_true);
            assert!(err < 1e-9, "seed {seed}: {err}");
        }
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        let a = Csr::from_rows(vec![vec![(1, 1.0)], vec![(0, 1.0), (1, 1.0)]]);
        let x = BandedLu::factor(&a).unwrap().solve(&[2.0, 5.0]);
        assert!((x[0] - 3.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
        let singular = Csr::from_rows(vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 1.0), (1, 1.0)]]);
        assert_eq!(BandedLu::factor(&singular).err().unwrap().id(), "singular-system");
    }

    #[test]
    fn bicgstab_converges_on_dominant_system() {
        let a = random_banded(200, 4, 4, 9, true);
        let x_true: Vec<f64> = (0..200).map(|k| 1.0 + k as f64 / 200.0).collect();
        let b = a.matvec(&x_true);
        let (x, out) = bicgstab(&a, &b, 1e-12, 500).unwrap();
        assert!(out.relative_residual < 1e-11);
        assert!(norm2(&sub(&x, &x_true)) / norm2(&x_true) < 1e-9);
    }
}
