//! Flattening the region above a graph `y = g(x)` with a conformal map.
//!
//! `ψ` solves Laplace's equation between the graph (`ψ = 0`) and the ceiling
//! `y = 2 M0 r0` (`ψ = 1`) with homogeneous Neumann data on the side walls, so
//! `(φ, ψ)` maps the physical region onto a rectangle. The solve runs on the
//! boundary-fitted coordinates `x = X`, `y = g(X) + Y σ(X)`, `σ = top − g`,
//! where Laplace's operator becomes
//! `ψ_XX + 2p ψ_XY + (p² + q²) ψ_YY + (p_X + p p_Y) ψ_Y` with `p = ∂Y/∂x`,
//! `q = ∂Y/∂y = 1/σ`.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::field::{derive, GridSpec, ScalarField};
use crate::solver::{BandedLu, Csr};

/// Highest derivative order in the sampled graph norm.
const NORM_ORDER: usize = 6;
const NORM_SAMPLES: usize = 2001;
const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 60;
const DEGENERATE_GRAD: f64 = 1e-10;

/// `g(x) = Σ c_k x^(k+2)` on `[−r0, r0]`, so `g(0) = g′(0) = 0` by
/// construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryGraph {
    coefficients: Vec<f64>,
    r0: f64,
    m0: f64,
}

impl BoundaryGraph {
    /// Validates `r0 > 0` and the sampled norm `Σ_k r0^k max|g^(k)| ≤ M0 r0`,
    /// `k ≤ 6`.
    pub fn new(coefficients: Vec<f64>, r0: f64, m0: f64) -> Result<Self> {
        if !(r0 > 0.0 && r0.is_finite()) || !(m0 > 0.0 && m0.is_finite()) {
            return Err(Error::usage(format!("graph needs r0 > 0 and M0 > 0, got r0={r0}, M0={m0}")));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::usage("graph coefficients must be finite"));
        }
        let graph = Self { coefficients, r0, m0 };
        let d0 = (graph.g(1e-9) - graph.g(0.0)) / 1e-9;
        if graph.g(0.0) != 0.0 || d0.abs() > 1e-8 {
            return Err(Error::usage(format!("graph must satisfy g(0) = g'(0) = 0, got slope {d0:e}")));
        }
        let norm = graph.sampled_norm();
        if norm > m0 * r0 * (1.0 + 1e-12) {
            return Err(Error::usage(format!("sampled graph norm {norm} exceeds M0 r0 = {}", m0 * r0)));
        }
        Ok(graph)
    }

    pub fn flat(r0: f64, m0: f64) -> Result<Self> {
        Self::new(Vec::new(), r0, m0)
    }

    /// `g(x) = a x²`.
    pub fn quadratic(a: f64, r0: f64, m0: f64) -> Result<Self> {
        Self::new(vec![a], r0, m0)
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn m0(&self) -> f64 {
        self.m0
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn ceiling(&self) -> f64 {
        2.0 * self.m0 * self.r0
    }

    pub fn g(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// `g^(m)(x)`.
    pub fn derivative(&self, x: f64, m: usize) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(k, _)| k + 2 >= m)
            .map(|(k, c)| {
                let p = k + 2;
                let falling: f64 = ((p - m + 1)..=p).map(|v| v as f64).product();
                c * falling * x.powi((p - m) as i32)
            })
            .sum()
    }

    pub fn sampled_norm(&self) -> f64 {
        (0..=NORM_ORDER)
            .map(|m| {
                let peak = (0..NORM_SAMPLES)
                    .map(|k| {
                        let x = -self.r0 + 2.0 * self.r0 * k as f64 / (NORM_SAMPLES - 1) as f64;
                        self.derivative(x, m).abs()
                    })
                    .fold(0.0, f64::max);
                self.r0.powi(m as i32) * peak
            })
            .sum()
    }

    /// Grid of spacing `h` covering `[−r0, r0] × [y_lo, ceiling]`, with
    /// `y_lo` a multiple of `h` at least one cell below the graph.
    pub fn physical_grid(&self, h: f64) -> Result<GridSpec> {
        let low = (0..NORM_SAMPLES)
            .map(|k| self.g(-self.r0 + 2.0 * self.r0 * k as f64 / (NORM_SAMPLES - 1) as f64))
            .fold(0.0, f64::min);
        let top = self.ceiling();
        let below = ((top - low) / h).ceil() + 1.0;
        let y_lo = top - below * h;
        GridSpec::new((-self.r0, self.r0), (y_lo, top), ((2.0 * self.r0 / h).round() as usize) + 1, below as usize + 1)
    }

    /// `(σ, p, q, p_X, p_Y)` at boundary-fitted coordinates `(X, Y)`.
    fn metric(&self, x: f64, y: f64) -> (f64, f64, f64, f64, f64) {
        let (g1, g2) = (self.derivative(x, 1), self.derivative(x, 2));
        let sigma = self.ceiling() - self.g(x);
        let p = -g1 * (1.0 - y) / sigma;
        let px = -(1.0 - y) * (g2 * sigma + g1 * g1) / (sigma * sigma);
        (sigma, p, 1.0 / sigma, px, g1 / sigma)
    }
}

/// Boundary-fitted node layout: `X_i = −r0 + i hx`, `Y_j = j hy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FittedGrid {
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    pub r0: f64,
}

impl FittedGrid {
    pub fn x(&self, i: usize) -> f64 {
        -self.r0 + i as f64 * self.hx
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.hy
    }
}

/// Sampled map. Arrays on the fitted grid have shape `(ny, nx)`.
#[derive(Debug, Clone)]
pub struct ConformalMap {
    graph: BoundaryGraph,
    fitted: FittedGrid,
    /// `Φ⁻¹ = scale · (φ, ψ)` on the fitted nodes.
    phi: Array2<f64>,
    psi: Array2<f64>,
    /// Physical derivatives `[φ_x, φ_y, ψ_x, ψ_y]`.
    inverse_jacobian: [Array2<f64>; 4],
    conformality: Array2<f64>,
    scale: f64,
    rect: GridSpec,
    /// Fractional fitted-grid coordinates of each rectangle node's image.
    located: Vec<(f64, f64)>,
    forward: [ScalarField; 2],
    jacobian: [ScalarField; 4],
    round_trip: f64,
}

/// Builds the map for the rectangle grid of spacing `1/n`; the fitted grid
/// has `2n + 1` by `n + 1` nodes.
pub fn build_map(graph: &BoundaryGraph, n: usize) -> Result<ConformalMap> {
    build_map_with(graph, n, Execution::default())
}

pub fn build_map_with(graph: &BoundaryGraph, n: usize, exec: Execution) -> Result<ConformalMap> {
    if n < 8 {
        return Err(Error::usage(format!("map resolution must be at least 8, got {n}")));
    }
    let r0 = graph.r0();
    let fitted = FittedGrid { nx: 2 * n + 1, ny: n + 1, hx: r0 / n as f64, hy: 1.0 / n as f64, r0 };
    let psi = solve_psi(graph, &fitted)?;
    let (phi, inverse_jacobian, conformality) = conjugate(graph, &fitted, &psi);

    // sides of the image are φ = const up to discretization; take the
    // innermost value on each side
    let last = fitted.nx - 1;
    let left = (0..fitted.ny).map(|j| phi[[j, 0]]).fold(f64::NEG_INFINITY, f64::max);
    let right = (0..fitted.ny).map(|j| phi[[j, last]]).fold(f64::INFINITY, f64::min);
    if !(left < 0.0 && right > 0.0) {
        return Err(Error::MapInversionFailure { nodes: vec![] });
    }
    // rounding in the flat case must not perturb the identity normalization
    let need = (-1.0 / left).max(1.0 / right);
    let scale = if need <= 1.0 + 1e-9 { 1.0 } else { need };
    let rect = GridSpec::with_spacing((-1.0, 1.0), (0.0, 1.0), 1.0 / n as f64)?;

    let mut map = ConformalMap {
        graph: graph.clone(),
        fitted,
        phi,
        psi,
        inverse_jacobian,
        conformality,
        scale,
        rect,
        located: Vec::new(),
        forward: [ScalarField::zeros(&rect), ScalarField::zeros(&rect)],
        jacobian: std::array::from_fn(|_| ScalarField::zeros(&rect)),
        round_trip: 0.0,
    };
    let (nxr, nyr) = (rect.nx, rect.ny);
    let span = (left, right);
    let solved = exec.map_range(nxr * nyr, |k| {
        let (i, j) = (k % nxr, k / nxr);
        map.locate(rect.x(i) / scale, rect.y(j) / scale, span)
    });
    let failed: Vec<(usize, usize)> = solved
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_none())
        .map(|(k, _)| (k % nxr, k / nxr))
        .collect();
    if !failed.is_empty() {
        return Err(Error::MapInversionFailure { nodes: failed });
    }
    map.located = solved.into_iter().map(|s| s.expect("checked above")).collect();

    let mut fx = Array2::zeros(rect.shape());
    let mut fy = Array2::zeros(rect.shape());
    let mut jac: [Array2<f64>; 4] = std::array::from_fn(|_| Array2::zeros(rect.shape()));
    let mut round_trip: f64 = 0.0;
    for (k, &(s, t)) in map.located.iter().enumerate() {
        let (i, j) = (k % nxr, k / nxr);
        let (x, y) = map.physical(s, t);
        fx[[j, i]] = x;
        fy[[j, i]] = y;
        let back = (scale * map.interp(&map.phi, s, t), scale * map.interp(&map.psi, s, t));
        round_trip = round_trip.max((back.0 - rect.x(i)).abs().max((back.1 - rect.y(j)).abs()));
        // DΦ = [D Φ⁻¹]⁻¹ with D Φ⁻¹ = scale · [[φ_x, φ_y], [ψ_x, ψ_y]]
        let d: Vec<f64> = map.inverse_jacobian.iter().map(|a| scale * map.interp(a, s, t)).collect();
        let det = d[0] * d[3] - d[1] * d[2];
        let inv = [d[3] / det, -d[1] / det, -d[2] / det, d[0] / det];
        for (slot, v) in jac.iter_mut().zip(inv) {
            slot[[j, i]] = v;
        }
    }
    let wrap = |a: Array2<f64>| ScalarField::new(rect, a, crate::field::Mask::full(&rect));
    map.forward = [wrap(fx)?, wrap(fy)?];
    let [a, b, c, d] = jac;
    map.jacobian = [wrap(a)?, wrap(b)?, wrap(c)?, wrap(d)?];
    map.round_trip = round_trip;
    Ok(map)
}

fn solve_psi(graph: &BoundaryGraph, f: &FittedGrid) -> Result<Array2<f64>> {
    let (nx, ny, hx, hy) = (f.nx, f.ny, f.hx, f.hy);
    let inner = ny - 2;
    let index = |i: usize, j: usize| i * inner + (j - 1);
    let mut rows = Vec::with_capacity(nx * inner);
    let mut rhs = vec![0.0; nx * inner];
    for i in 0..nx {
        for j in 1..ny - 1 {
            let (_, p, q, px, py) = graph.metric(f.x(i), f.y(j));
            let mut row = Vec::with_capacity(9);
            let mut b = 0.0;
            let mut push = |ii: usize, jj: usize, c: f64| {
                if jj == ny - 1 {
                    b -= c;
                } else if jj > 0 {
                    row.push((index(ii, jj), c));
                }
            };
            let (cyy, cy) = if i == 0 || i == nx - 1 {
                // Neumann wall: ghost column from ψ_X = −p ψ_Y, and
                // ψ_XY = −p_Y ψ_Y − p ψ_YY along the wall
                let (side, inward) = if i == 0 { (1.0, 1) } else { (-1.0, i - 1) };
                push(inward, j, 2.0 / (hx * hx));
                push(i, j, -2.0 / (hx * hx));
                (q * q - p * p, px + p * py + side * 2.0 * p / hx - 2.0 * p * py)
            } else {
                push(i - 1, j, 1.0 / (hx * hx));
                push(i + 1, j, 1.0 / (hx * hx));
                push(i, j, -2.0 / (hx * hx));
                let cxy = 2.0 * p / (4.0 * hx * hy);
                push(i + 1, j + 1, cxy);
                push(i - 1, j - 1, cxy);
                push(i + 1, j - 1, -cxy);
                push(i - 1, j + 1, -cxy);
                (p * p + q * q, px + p * py)
            };
            push(i, j + 1, cyy / (hy * hy) + cy / (2.0 * hy));
            push(i, j - 1, cyy / (hy * hy) - cy / (2.0 * hy));
            push(i, j, -2.0 * cyy / (hy * hy));
            rhs[index(i, j)] = b;
            rows.push(row);
        }
    }
    let matrix = Csr::from_rows(rows);
    let sol = BandedLu::factor(&matrix)?.solve(&rhs);
    let mut psi = Array2::zeros((ny, nx));
    for i in 0..nx {
        psi[[ny - 1, i]] = 1.0;
        for j in 1..ny - 1 {
            psi[[j, i]] = sol[index(i, j)];
        }
    }
    Ok(psi)
}

/// Second-order difference along axis 1 (X) or 0 (Y), one-sided at the ends.
fn diff(a: &Array2<f64>, axis: usize, h: f64) -> Array2<f64> {
    let (ny, nx) = a.dim();
    let n = if axis == 1 { nx } else { ny };
    Array2::from_shape_fn((ny, nx), |(j, i)| {
        let at = |k: usize| if axis == 1 { a[[j, k]] } else { a[[k, i]] };
        let k = if axis == 1 { i } else { j };
        if k == 0 {
            (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
        } else if k == n - 1 {
            (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h)
        } else {
            (at(k + 1) - at(k - 1)) / (2.0 * h)
        }
    })
}

/// Physical derivatives `(f_x, f_y)` from fitted-grid samples.
fn physical_gradient(graph: &BoundaryGraph, f: &FittedGrid, a: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
    let (ax, ay) = (diff(a, 1, f.hx), diff(a, 0, f.hy));
    let gx = Array2::from_shape_fn(a.dim(), |(j, i)| {
        let (_, p, _, _, _) = graph.metric(f.x(i), f.y(j));
        ax[[j, i]] + p * ay[[j, i]]
    });
    let gy = Array2::from_shape_fn(a.dim(), |(j, i)| {
        let (_, _, q, _, _) = graph.metric(f.x(i), f.y(j));
        q * ay[[j, i]]
    });
    (gx, gy)
}

/// Harmonic conjugate by trapezoid path integration: along the graph from
/// `X = 0`, then up each column. Returns `φ`, the physical Jacobian of
/// `(φ, ψ)` and the Cauchy-Riemann defect.
fn conjugate(graph: &BoundaryGraph, f: &FittedGrid, psi: &Array2<f64>) -> (Array2<f64>, [Array2<f64>; 4], Array2<f64>) {
    let (ny, nx) = psi.dim();
    let (psi_x, psi_y) = physical_gradient(graph, f, psi);
    let phi_big_x = Array2::from_shape_fn((ny, nx), |(j, i)| {
        let slope = graph.derivative(f.x(i), 1) * (1.0 - f.y(j));
        psi_y[[j, i]] - psi_x[[j, i]] * slope
    });
    let phi_big_y = Array2::from_shape_fn((ny, nx), |(j, i)| {
        let (sigma, ..) = graph.metric(f.x(i), f.y(j));
        -sigma * psi_x[[j, i]]
    });
    let mut phi = Array2::zeros((ny, nx));
    let mid = nx / 2;
    for i in mid + 1..nx {
        phi[[0, i]] = phi[[0, i - 1]] + 0.5 * f.hx * (phi_big_x[[0, i - 1]] + phi_big_x[[0, i]]);
    }
    for i in (0..mid).rev() {
        phi[[0, i]] = phi[[0, i + 1]] - 0.5 * f.hx * (phi_big_x[[0, i + 1]] + phi_big_x[[0, i]]);
    }
    for i in 0..nx {
        for j in 1..ny {
            phi[[j, i]] = phi[[j - 1, i]] + 0.5 * f.hy * (phi_big_y[[j - 1, i]] + phi_big_y[[j, i]]);
        }
    }
    let (phi_x, phi_y) = physical_gradient(graph, f, &phi);
    let defect = Array2::from_shape_fn((ny, nx), |(j, i)| {
        (phi_x[[j, i]] - psi_y[[j, i]]).abs() + (phi_y[[j, i]] + psi_x[[j, i]]).abs()
    });
    (phi, [phi_x, phi_y, psi_x, psi_y], defect)
}

impl ConformalMap {
    pub fn graph(&self) -> &BoundaryGraph {
        &self.graph
    }

    pub fn fitted(&self) -> &FittedGrid {
        &self.fitted
    }

    /// Rectangle grid on `[−1, 1] × [0, 1]`.
    pub fn rect(&self) -> &GridSpec {
        &self.rect
    }

    /// Normalization of `Φ⁻¹ = scale · (φ, ψ)`; 1 unless the raw image is
    /// narrower than `[−1, 1]`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `[Φ₁, Φ₂]` sampled on the rectangle grid.
    pub fn forward(&self) -> &[ScalarField; 2] {
        &self.forward
    }

    /// `[∂₁Φ₁, ∂₂Φ₁, ∂₁Φ₂, ∂₂Φ₂]` on the rectangle grid.
    pub fn jacobian(&self) -> &[ScalarField; 4] {
        &self.jacobian
    }

    /// `(φ, ψ)` on the fitted grid, before scaling.
    pub fn inverse(&self) -> (&Array2<f64>, &Array2<f64>) {
        (&self.phi, &self.psi)
    }

    /// Cauchy-Riemann defect of `(φ, ψ)` on the fitted grid.
    pub fn conformality(&self) -> &Array2<f64> {
        &self.conformality
    }

    pub fn conformality_residual(&self) -> f64 {
        self.conformality.iter().copied().fold(0.0, f64::max)
    }

    /// Defect restricted to `|X| ≤ 3 r0 / 4`, away from the corners where
    /// the graph meets the side walls at an angle other than π/2.
    pub fn conformality_residual_interior(&self) -> f64 {
        let f = &self.fitted;
        self.conformality
            .indexed_iter()
            .filter(|((_, i), _)| f.x(*i).abs() <= 0.75 * f.r0 + 1e-12)
            .map(|(_, v)| *v)
            .fold(0.0, f64::max)
    }

    /// Largest `|scale·(φ, ψ)(Φ(η)) − η|` over the rectangle nodes.
    pub fn round_trip(&self) -> f64 {
        self.round_trip
    }

    /// Physical point of fractional fitted coordinates `(s, t)`.
    fn physical(&self, s: f64, t: f64) -> (f64, f64) {
        let x = -self.fitted.r0 + s * self.fitted.hx;
        let y = t * self.fitted.hy;
        (x, self.graph.g(x) + y * (self.graph.ceiling() - self.graph.g(x)))
    }

    fn cell(&self, s: f64, t: f64) -> (usize, usize, f64, f64) {
        let i0 = (s.floor().max(0.0) as usize).min(self.fitted.nx - 2);
        let j0 = (t.floor().max(0.0) as usize).min(self.fitted.ny - 2);
        (i0, j0, s - i0 as f64, t - j0 as f64)
    }

    fn interp(&self, a: &Array2<f64>, s: f64, t: f64) -> f64 {
        let (i, j, u, v) = self.cell(s, t);
        let bottom = a[[j, i]] + u * (a[[j, i + 1]] - a[[j, i]]);
        let top = a[[j + 1, i]] + u * (a[[j + 1, i + 1]] - a[[j + 1, i]]);
        bottom + v * (top - bottom)
    }

    /// Newton on the bilinear interpolant of `(φ, ψ)` for the fitted
    /// coordinates mapping to `(a, b)`.
    fn locate(&self, a: f64, b: f64, (left, right): (f64, f64)) -> Option<(f64, f64)> {
        let (smax, tmax) = ((self.fitted.nx - 1) as f64, (self.fitted.ny - 1) as f64);
        let mut s = ((a - left) / (right - left) * smax).clamp(0.0, smax);
        let mut t = (b * tmax).clamp(0.0, tmax);
        let tol = NEWTON_TOL * (1.0 + a.abs() + b.abs());
        for _ in 0..NEWTON_MAX_ITER {
            let (i, j, u, v) = self.cell(s, t);
            let corners = |m: &Array2<f64>| (m[[j, i]], m[[j, i + 1]], m[[j + 1, i]], m[[j + 1, i + 1]]);
            let eval = |(c00, c10, c01, c11): (f64, f64, f64, f64)| {
                let val = c00 * (1.0 - u) * (1.0 - v) + c10 * u * (1.0 - v) + c01 * (1.0 - u) * v + c11 * u * v;
                let ds = (c10 - c00) * (1.0 - v) + (c11 - c01) * v;
                let dt = (c01 - c00) * (1.0 - u) + (c11 - c10) * u;
                (val, ds, dt)
            };
            let (f1, a11, a12) = eval(corners(&self.phi));
            let (f2, a21, a22) = eval(corners(&self.psi));
            let (r1, r2) = (f1 - a, f2 - b);
            if r1.abs() + r2.abs() <= tol {
                return Some((s, t));
            }
            let det = a11 * a22 - a12 * a21;
            if !(det.abs() > 0.0) {
                return None;
            }
            s = (s - (a22 * r1 - a12 * r2) / det).clamp(0.0, smax);
            t = (t - (a11 * r2 - a21 * r1) / det).clamp(0.0, tmax);
        }
        None
    }

    /// CSV rows `η₁, η₂, Φ₁, Φ₂, DΦ entries, det DΦ, conformality defect`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eta1,eta2,phi1,phi2,d1phi1,d2phi1,d1phi2,d2phi2,det,cr_defect\n");
        let r = &self.rect;
        for (k, &(s, t)) in self.located.iter().enumerate() {
            let (i, j) = (k % r.nx, k / r.nx);
            let jac: Vec<f64> = self.jacobian.iter().map(|f| f.at(i, j)).collect();
            let det = jac[0] * jac[3] - jac[1] * jac[2];
            let cells = [
                r.x(i),
                r.y(j),
                self.forward[0].at(i, j),
                self.forward[1].at(i, j),
                jac[0],
                jac[1],
                jac[2],
                jac[3],
                det,
                self.interp(&self.conformality, s, t),
            ];
            let line: Vec<String> = cells.iter().map(|v| crate::report::fmt_f64(*v)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certification {
    pub conformality_residual: f64,
    pub conformality_residual_interior: f64,
    pub jacobian_min_det: f64,
    pub jacobian_max_det: f64,
    /// Extremes of the operator norm `|DΦ|`.
    pub grad_min: f64,
    pub grad_max: f64,
    /// Extremes of `|Φ(η)| / |η|` over nodes with `|η| ≥ 4h`.
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub ratio_samples: usize,
    /// `r0 / ratio_min`, the constant in `(r0/K)|η| ≤ |Φ(η)|`.
    pub k_estimate: f64,
    /// `max |Φ₂(η₁, 0) − g(Φ₁(η₁, 0))|`.
    pub boundary_error: f64,
    pub origin_offset: f64,
    pub round_trip: f64,
    pub scale: f64,
}

pub fn certify(map: &ConformalMap) -> Certification {
    certify_with(map, Execution::default())
}

pub fn certify_with(map: &ConformalMap, exec: Execution) -> Certification {
    let r = map.rect;
    let per_node = exec.map_range(r.nx * r.ny, |k| {
        let (i, j) = (k % r.nx, k / r.nx);
        let d: Vec<f64> = map.jacobian.iter().map(|f| f.at(i, j)).collect();
        let det = d[0] * d[3] - d[1] * d[2];
        // largest singular value of a 2x2 matrix
        let fro = d.iter().map(|v| v * v).sum::<f64>();
        let norm = (0.5 * (fro + ((fro * fro - 4.0 * det * det).max(0.0)).sqrt())).sqrt();
        let eta = r.x(i).hypot(r.y(j));
        let image = map.forward[0].at(i, j).hypot(map.forward[1].at(i, j));
        let ratio = (eta >= 4.0 * r.h - 1e-12).then(|| image / eta);
        (det, norm, ratio)
    });
    let fold = |it: &mut dyn Iterator<Item = f64>| it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let (det_lo, det_hi) = fold(&mut per_node.iter().map(|p| p.0));
    let (g_lo, g_hi) = fold(&mut per_node.iter().map(|p| p.1));
    let ratios: Vec<f64> = per_node.iter().filter_map(|p| p.2).collect();
    let (ra_lo, ra_hi) = fold(&mut ratios.iter().copied());
    let boundary_error = (0..r.nx)
        .map(|i| (map.forward[1].at(i, 0) - map.graph.g(map.forward[0].at(i, 0))).abs())
        .fold(0.0, f64::max);
    let origin = r.node_at(0.0, 0.0).map(|(i, j)| map.forward[0].at(i, j).hypot(map.forward[1].at(i, j)));
    Certification {
        conformality_residual: map.conformality_residual(),
        conformality_residual_interior: map.conformality_residual_interior(),
        jacobian_min_det: det_lo,
        jacobian_max_det: det_hi,
        grad_min: g_lo,
        grad_max: g_hi,
        ratio_min: ra_lo,
        ratio_max: ra_hi,
        ratio_samples: ratios.len(),
        k_estimate: map.graph.r0() / ra_lo,
        boundary_error,
        origin_offset: origin.unwrap_or(f64::NAN),
        round_trip: map.round_trip,
        scale: map.scale,
    }
}

/// `u(η) = v(Φ(η))` by bilinear sampling of `v` on its physical grid.
pub fn pullback_solution(map: &ConformalMap, v: &ScalarField) -> Result<ScalarField> {
    let r = map.rect;
    let values = sample_forward(map, v)?;
    ScalarField::new(r, Array2::from_shape_vec(r.shape(), values).expect("node count"), crate::field::Mask::full(&r))
}

fn sample_forward(map: &ConformalMap, v: &ScalarField) -> Result<Vec<f64>> {
    let r = map.rect;
    Execution::default()
        .map_range(r.nx * r.ny, |k| {
            let (i, j) = (k % r.nx, k / r.nx);
            v.sample(map.forward[0].at(i, j), map.forward[1].at(i, j)).ok_or(Error::PullbackOutOfDomain { i, j })
        })
        .into_iter()
        .collect()
}

/// `a = |∇Φ₁|² ([DΦ]⁻¹ ã∘Φ − 2 ∇(|∇Φ₁|⁻²))` on the rectangle grid, with
/// `ã = [ã₁, ã₂]` sampled on a physical grid.
pub fn transformed_drift(map: &ConformalMap, drift: &[ScalarField; 2]) -> Result<[ScalarField; 2]> {
    let r = map.rect;
    let [j11, j12, j21, j22] = &map.jacobian;
    let g2 = j11.mul(j11)?.add(&j12.mul(j12)?)?;
    for j in 0..r.ny {
        for i in 0..r.nx {
            let v = g2.at(i, j).sqrt();
            if !(v >= DEGENERATE_GRAD) {
                return Err(Error::DegenerateJacobianNode { i, j, value: v });
            }
        }
    }
    let inv_g2 = g2.map(|v| 1.0 / v);
    let (wx, wy) = (derive(&inv_g2, (1, 0))?, derive(&inv_g2, (0, 1))?);
    let a1 = sample_forward(map, &drift[0])?;
    let a2 = sample_forward(map, &drift[1])?;
    let mut out = [Array2::zeros(r.shape()), Array2::zeros(r.shape())];
    for j in 0..r.ny {
        for i in 0..r.nx {
            let k = j * r.nx + i;
            let (d11, d12, d21, d22) = (j11.at(i, j), j12.at(i, j), j21.at(i, j), j22.at(i, j));
            let det = d11 * d22 - d12 * d21;
            let (b1, b2) = ((d22 * a1[k] - d12 * a2[k]) / det, (d11 * a2[k] - d21 * a1[k]) / det);
            let s = g2.at(i, j);
            out[0][[j, i]] = s * (b1 - 2.0 * wx.at(i, j));
            out[1][[j, i]] = s * (b2 - 2.0 * wy.at(i, j));
        }
    }
    let [o1, o2] = out;
    let full = crate::field::Mask::full(&r);
    Ok([ScalarField::new(r, o1, full.clone())?, ScalarField::new(r, o2, full)?])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_norm_and_derivatives() {
        let g = BoundaryGraph::new(vec![0.02, 0.01], 1.0, 1.0).unwrap();
        assert!((g.derivative(0.5, 1) - (0.04 * 0.5 + 0.03 * 0.25)).abs() < 1e-15);
        assert!((g.derivative(2.0, 3) - 0.06).abs() < 1e-15);
        assert_eq!(g.derivative(2.0, 4), 0.0);
        // 0.1 + 0.2 + 0.2 for a = 0.1 on [−1, 1]
        assert!((BoundaryGraph::quadratic(0.1, 1.0, 0.5).unwrap().sampled_norm() - 0.5).abs() < 1e-12);
        assert!(BoundaryGraph::quadratic(0.2, 1.0, 0.5).is_err());
    }

    #[test]
    fn flat_map_is_identity() {
        let map = build_map(&BoundaryGraph::flat(1.0, 0.5).unwrap(), 16).unwrap();
        let c = certify(&map);
        assert!(c.conformality_residual <= 1e-8, "{c:?}");
        assert!((c.jacobian_min_det - 1.0).abs() < 1e-8 && (c.jacobian_max_det - 1.0).abs() < 1e-8);
        assert!((c.ratio_min - 1.0).abs() < 1e-6 && (c.ratio_max - 1.0).abs() < 1e-6);
        assert_eq!(c.scale, 1.0);
        let u = pullback_solution(&map, &ScalarField::constant(&GridSpec::with_spacing((-1.0, 1.0), (-0.5, 1.0), 1.0 / 16.0).unwrap(), 1.0)).unwrap();
        assert!(u.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn scaled_flat_map_and_drift() {
        let graph = BoundaryGraph::flat(2.0, 0.5).unwrap();
        let map = build_map(&graph, 16).unwrap();
        for (f, k) in map.forward().iter().zip([0, 1]) {
            let r = map.rect();
            for j in 0..r.ny {
                for i in 0..r.nx {
                    let eta = if k == 0 { r.x(i) } else { r.y(j) };
                    assert!((f.at(i, j) - 2.0 * eta).abs() < 1e-10);
                }
            }
        }
        let pg = graph.physical_grid(1.0 / 8.0).unwrap();
        let drift = [ScalarField::from_fn(&pg, |x, _| x), ScalarField::from_fn(&pg, |_, y| 1.0 + y)];
        let a = transformed_drift(&map, &drift).unwrap();
        let r = map.rect();
        for j in 0..r.ny {
            for i in 0..r.nx {
                assert!((a[0].at(i, j) - 2.0 * 2.0 * r.x(i)).abs() < 1e-8);
                assert!((a[1].at(i, j) - 2.0 * (1.0 + 2.0 * r.y(j))).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn pullback_rejects_points_outside() {
        let map = build_map(&BoundaryGraph::flat(1.0, 0.5).unwrap(), 8).unwrap();
        let small = GridSpec::with_spacing((-0.5, 0.5), (0.0, 0.5), 1.0 / 16.0).unwrap();
        let e = pullback_solution(&map, &ScalarField::zeros(&small)).unwrap_err();
        assert_eq!(e.id(), "pullback-out-of-domain");
    }
}
