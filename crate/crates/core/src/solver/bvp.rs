use std::f64::consts::PI;

use serde::Serialize;

use super::sparse::{bicgstab, norm2, sub, BandedLu, Csr};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::field::{GridSpec, Mask, ScalarField};
use crate::plate::PlateMaterial;

/// Dirichlet value and first derivatives of the data on the grid. Only the
/// edge samples are read.
#[derive(Debug, Clone)]
pub struct BoundaryData {
    pub value: ScalarField,
    pub dx: ScalarField,
    pub dy: ScalarField,
}

impl BoundaryData {
    pub fn from_fns(
        grid: &GridSpec,
        v: impl Fn(f64, f64) -> f64,
        vx: impl Fn(f64, f64) -> f64,
        vy: impl Fn(f64, f64) -> f64,
    ) -> Self {
        Self {
            value: ScalarField::from_fn(grid, v),
            dx: ScalarField::from_fn(grid, vx),
            dy: ScalarField::from_fn(grid, vy),
        }
    }

    pub fn zero(grid: &GridSpec) -> Self {
        Self::from_fns(grid, |_, _| 0.0, |_, _| 0.0, |_, _| 0.0)
    }

    /// `alpha·self + beta·other`.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        Ok(Self {
            value: ScalarField::combine(&[(alpha, &self.value), (beta, &other.value)])?,
            dx: ScalarField::combine(&[(alpha, &self.dx), (beta, &other.dx)])?,
            dy: ScalarField::combine(&[(alpha, &self.dy), (beta, &other.dy)])?,
        })
    }
}

/// `Δ²v − ã·∇Δv − q̃₂(v) = f` on the grid rectangle, clamped on the bottom
/// edge, with value and normal derivative prescribed on the other edges.
#[derive(Debug, Clone)]
pub struct ClampedBVP {
    material: PlateMaterial,
    grid: GridSpec,
    data: BoundaryData,
    source: ScalarField,
}

const CLAMP_TOL: f64 = 1e-10;

impl ClampedBVP {
    pub fn new(material: PlateMaterial, data: BoundaryData, source: ScalarField) -> Result<Self> {
        let grid = *material.stiffness.grid();
        for f in [&data.value, &data.dx, &data.dy, &source] {
            if !f.grid().same_as(&grid) {
                return Err(Error::ShapeMismatch("boundary data and material grids differ".into()));
            }
        }
        if grid.y_min.abs() > 1e-12 * grid.h {
            return Err(Error::usage(format!("clamped edge must lie on y = 0, grid starts at {}", grid.y_min)));
        }
        let scale = data.value.max_abs().max(1.0);
        let value = (0..grid.nx).map(|i| data.value.at(i, 0).abs()).fold(0.0, f64::max);
        let slope = (0..grid.nx).map(|i| data.dy.at(i, 0).abs()).fold(0.0, f64::max);
        if value > CLAMP_TOL * scale || slope > CLAMP_TOL * scale {
            return Err(Error::NotClamped { value, slope, tol: CLAMP_TOL * scale });
        }
        Ok(Self { material, grid, data, source })
    }

    /// Homogeneous equation.
    pub fn homogeneous(material: PlateMaterial, data: BoundaryData) -> Result<Self> {
        let f = ScalarField::zeros(material.stiffness.grid());
        Self::new(material, data, f)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn material(&self) -> &PlateMaterial {
        &self.material
    }

    pub fn data(&self) -> &BoundaryData {
        &self.data
    }
}

/// Interior equations in row-compressed form. Unknown `k` sits at grid node
/// `unknowns[k]`; the index runs fastest along y.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: Csr,
    pub rhs: Vec<f64>,
    pub unknowns: Vec<(usize, usize)>,
    grid: GridSpec,
    boundary: ScalarField,
}

impl SparseSystem {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn index_of(&self, i: usize, j: usize) -> Option<usize> {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        (i >= 1 && i + 1 < nx && j >= 1 && j + 1 < ny).then(|| (i - 1) * (ny - 2) + (j - 1))
    }

    /// Full-grid field from interior unknowns and the boundary values.
    pub fn to_field(&self, x: &[f64]) -> ScalarField {
        let mut values = self.boundary.values().clone();
        for (k, &(i, j)) in self.unknowns.iter().enumerate() {
            values[(j, i)] = x[k];
        }
        ScalarField::from_parts(self.grid, values, Mask::full(&self.grid))
    }

    /// Interior samples of `v` in unknown order.
    pub fn gather(&self, v: &ScalarField) -> Vec<f64> {
        self.unknowns.iter().map(|&(i, j)| v.at(i, j)).collect()
    }
}

type Stencil = [[f64; 5]; 5];

/// Weights of the discrete operator at node `(i, j)`, indexed `[di+2][dj+2]`.
fn node_stencil(mat: &PlateMaterial, i: usize, j: usize, h: f64) -> Stencil {
    let mut lap = [[0.0; 5]; 5];
    let h2 = h * h;
    lap[2][2] = -4.0 / h2;
    for (a, b) in [(1, 2), (3, 2), (2, 1), (2, 3)] {
        lap[a][b] = 1.0 / h2;
    }
    let mut s = [[0.0; 5]; 5];
    // Δ_h ∘ Δ_h
    for (da, row) in lap.iter().enumerate().skip(1).take(3) {
        for (db, &w) in row.iter().enumerate().skip(1).take(3) {
            if w == 0.0 {
                continue;
            }
            for a in 1..4 {
                for b in 1..4 {
                    let c = lap[a][b];
                    if c != 0.0 {
                        s[da + a - 2][db + b - 2] += w * c;
                    }
                }
            }
        }
    }
    let a1 = mat.drift[0].at(i, j);
    let a2 = mat.drift[1].at(i, j);
    // −a·∇(Δ_h) with central first differences
    for a in 1..4 {
        for b in 1..4 {
            let c = lap[a][b];
            if c == 0.0 {
                continue;
            }
            s[a + 1][b] -= a1 * c / (2.0 * h);
            s[a - 1][b] += a1 * c / (2.0 * h);
            s[a][b + 1] -= a2 * c / (2.0 * h);
            s[a][b - 1] += a2 * c / (2.0 * h);
        }
    }
    let c20 = mat.q2.c20.at(i, j);
    let c11 = mat.q2.c11.at(i, j);
    let c02 = mat.q2.c02.at(i, j);
    for (d, w) in [(1usize, 1.0), (2, -2.0), (3, 1.0)] {
        s[d][2] -= c20 * w / h2;
        s[2][d] -= c02 * w / h2;
    }
    for (a, b, sign) in [(3, 3, 1.0), (1, 1, 1.0), (3, 1, -1.0), (1, 3, -1.0)] {
        s[a][b] -= c11 * sign / (4.0 * h2);
    }
    s
}

/// Applies the interior stencil directly to grid samples. Defined on nodes
/// at least two cells from every edge.
pub fn apply_stencil(mat: &PlateMaterial, v: &ScalarField) -> Result<ScalarField> {
    let g = *v.grid();
    if !mat.stiffness.grid().same_as(&g) {
        return Err(Error::ShapeMismatch("material and field grids differ".into()));
    }
    let mut out = ndarray::Array2::zeros(g.shape());
    for j in 2..g.ny - 2 {
        for i in 2..g.nx - 2 {
            let s = node_stencil(mat, i, j, g.h);
            let mut acc = 0.0;
            for (a, row) in s.iter().enumerate() {
                for (b, &w) in row.iter().enumerate() {
                    if w != 0.0 {
                        acc += w * v.at(i + a - 2, j + b - 2);
                    }
                }
            }
            out[(j, i)] = acc;
        }
    }
    let mask = Mask::full(&g).erode(2);
    Ok(ScalarField::from_parts(g, out, mask))
}

/// Linear form `coef·unknown + constant` for a (possibly ghost) node value.
fn resolve(bvp: &ClampedBVP, ti: isize, tj: isize) -> (Option<usize>, f64) {
    let g = &bvp.grid;
    let (nx, ny) = (g.nx as isize, g.ny as isize);
    let h = g.h;
    let d = &bvp.data;
    // ghost layers: mirror through the edge, corrected by the normal derivative
    let (mi, mj, shift) = if ti == -1 {
        (1, tj, -2.0 * h * d.dx.at(0, tj as usize))
    } else if ti == nx {
        (nx - 2, tj, 2.0 * h * d.dx.at(g.nx - 1, tj as usize))
    } else if tj == -1 {
        (ti, 1, -2.0 * h * d.dy.at(ti as usize, 0))
    } else if tj == ny {
        (ti, ny - 2, 2.0 * h * d.dy.at(ti as usize, g.ny - 1))
    } else {
        (ti, tj, 0.0)
    };
    let (i, j) = (mi as usize, mj as usize);
    if i == 0 || j == 0 || i == g.nx - 1 || j == g.ny - 1 {
        (None, d.value.at(i, j) + shift)
    } else {
        (Some((i - 1) * (g.ny - 2) + (j - 1)), shift)
    }
}

pub fn assemble(bvp: &ClampedBVP) -> Result<SparseSystem> {
    let g = bvp.grid;
    let (nxi, nyi) = (g.nx - 2, g.ny - 2);
    let n = nxi * nyi;
    let mut rows = Vec::with_capacity(n);
    let mut rhs = Vec::with_capacity(n);
    let mut unknowns = Vec::with_capacity(n);
    for i in 1..g.nx - 1 {
        for j in 1..g.ny - 1 {
            let s = node_stencil(&bvp.material, i, j, g.h);
            if s.iter().flatten().any(|w| !w.is_finite()) {
                return Err(Error::AssemblyDegenerate(format!("non-finite coefficient at node ({i}, {j})")));
            }
            let mut row = Vec::with_capacity(25);
            let mut b = bvp.source.at(i, j);
            for (a, srow) in s.iter().enumerate() {
                for (bb, &w) in srow.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    let (k, c) = resolve(bvp, i as isize + a as isize - 2, j as isize + bb as isize - 2);
                    b -= w * c;
                    if let Some(k) = k {
                        row.push((k, w));
                    }
                }
            }
            rows.push(row);
            rhs.push(b);
            unknowns.push((i, j));
        }
    }
    let matrix = Csr::from_rows(rows);
    if let Some(k) = (0..n).find(|&k| matrix.get(k, k) == 0.0) {
        let (i, j) = unknowns[k];
        return Err(Error::AssemblyDegenerate(format!("zero diagonal at node ({i}, {j})")));
    }
    Ok(SparseSystem { matrix, rhs, unknowns, grid: g, boundary: bvp.data.value.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverPath {
    Direct,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveReport {
    pub path: SolverPath,
    /// `‖Ax − b‖ / ‖b‖` (absolute when `b = 0`).
    pub residual: f64,
    pub iterations: usize,
    pub unknowns: usize,
}

const DIRECT_LIMIT: usize = 100_000;
const RESIDUAL_TARGET: f64 = 1e-10;

pub fn solve(sys: &SparseSystem) -> Result<(ScalarField, SolveReport)> {
    let path = if sys.unknowns.len() <= DIRECT_LIMIT { SolverPath::Direct } else { SolverPath::Iterative };
    solve_with(sys, path)
}

pub fn solve_with(sys: &SparseSystem, path: SolverPath) -> Result<(ScalarField, SolveReport)> {
    let n = sys.unknowns.len();
    let bnorm = norm2(&sys.rhs);
    let relative = |x: &[f64]| {
        let r = norm2(&sub(&sys.rhs, &sys.matrix.matvec(x)));
        if bnorm > 0.0 { r / bnorm } else { r }
    };
    let (x, iterations) = match path {
        SolverPath::Direct => {
            let lu = BandedLu::factor(&sys.matrix)?;
            let mut x = lu.solve(&sys.rhs);
            // one step of iterative refinement
            let r = sub(&sys.rhs, &sys.matrix.matvec(&x));
            let dx = lu.solve(&r);
            for (xi, d) in x.iter_mut().zip(dx) {
                *xi += d;
            }
            (x, 1)
        }
        SolverPath::Iterative => {
            let (x, out) = bicgstab(&sys.matrix, &sys.rhs, RESIDUAL_TARGET * 0.1, 20 * n.max(100))?;
            (x, out.iterations)
        }
    };
    let residual = relative(&x);
    if !residual.is_finite() {
        return Err(Error::SolverStagnation { iterations, residual });
    }
    Ok((sys.to_field(&x), SolveReport { path, residual, iterations, unknowns: n }))
}

/// Manufactured solutions with closed-form forcing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ManufacturedCase {
    /// `y² sin(πx)`, `B = 1`, `ν = 0.3`.
    SinY2,
    /// `y²`, biharmonic and reproduced exactly by the stencil.
    Y2,
    /// `y² sin(πx)` with `B = 1 + x²/4`, `ν = 0.3`.
    VariableStiffness,
}

const NU: f64 = 0.3;

impl ManufacturedCase {
    pub const ALL: [ManufacturedCase; 3] = [Self::SinY2, Self::Y2, Self::VariableStiffness];

    pub fn id(self) -> &'static str {
        match self {
            Self::SinY2 => "y2-sin",
            Self::Y2 => "y2",
            Self::VariableStiffness => "variable-b",
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.id() == id)
            .ok_or_else(|| Error::usage(format!("unknown manufactured case {id:?}")))
    }

    /// `(v, v_x, v_y)` at a point.
    pub fn exact(self, x: f64, y: f64) -> (f64, f64, f64) {
        match self {
            Self::Y2 => (y * y, 0.0, 2.0 * y),
            Self::SinY2 | Self::VariableStiffness => {
                let (s, c) = (PI * x).sin_cos();
                (y * y * s, PI * y * y * c, 2.0 * y * s)
            }
        }
    }

    pub fn forcing(self, x: f64, y: f64) -> f64 {
        let s = (PI * x).sin();
        let bilap = (PI.powi(4) * y * y - 4.0 * PI * PI) * s;
        match self {
            Self::Y2 => 0.0,
            Self::SinY2 => bilap,
            Self::VariableStiffness => {
                let b = 1.0 + x * x / 4.0;
                let drift = (x / b) * (2.0 - PI * PI * y * y) * PI * (PI * x).cos();
                bilap + drift - 0.5 * PI * PI * y * y * s / b + NU * s / b
            }
        }
    }

    pub fn material(self, grid: &GridSpec) -> Result<PlateMaterial> {
        match self {
            Self::SinY2 | Self::Y2 => PlateMaterial::constant(grid, 1.0, NU),
            Self::VariableStiffness => PlateMaterial::from_stiffness(
                &ScalarField::from_fn(grid, |x, _| 1.0 + x * x / 4.0),
                &ScalarField::constant(grid, NU),
                Default::default(),
            ),
        }
    }

    pub fn bvp(self, grid: &GridSpec) -> Result<ClampedBVP> {
        let data = BoundaryData::from_fns(grid, |x, y| self.exact(x, y).0, |x, y| self.exact(x, y).1, |x, y| {
            self.exact(x, y).2
        });
        let f = ScalarField::from_fn(grid, |x, y| self.forcing(x, y));
        ClampedBVP::new(self.material(grid)?, data, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub l2_error: f64,
    /// `log₂(e(2h)/e(h))` against the previous row; absent on the first row
    /// and on rows flagged exact.
    pub order: Option<f64>,
    pub exact: bool,
    pub report: SolveReport,
}

const EXACT_LEVEL: f64 = 1e-9;

pub fn convergence_study(case: ManufacturedCase, grids: &[GridSpec]) -> Result<Vec<ConvergenceRow>> {
    convergence_study_with(case, grids, Execution::default())
}

pub fn convergence_study_with(
    case: ManufacturedCase,
    grids: &[GridSpec],
    exec: Execution,
) -> Result<Vec<ConvergenceRow>> {
    if grids.len() < 3 {
        return Err(Error::usage(format!("convergence study needs at least 3 grids, got {}", grids.len())));
    }
    let solved = exec.map(grids, |g| -> Result<(f64, f64, SolveReport)> {
        let sys = assemble(&case.bvp(g)?)?;
        let (u, report) = solve(&sys)?;
        let mut sq = 0.0;
        let mut scale = 0.0_f64;
        for j in 0..g.ny {
            for i in 0..g.nx {
                let e = case.exact(g.x(i), g.y(j)).0;
                sq += (u.at(i, j) - e).powi(2);
                scale = scale.max(e.abs());
            }
        }
        Ok((g.h, (sq * g.h * g.h).sqrt(), report))
    });
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(grids.len());
    for item in solved {
        let (h, err, report) = item?;
        let exact = err <= EXACT_LEVEL;
        let order = match rows.last() {
            Some(prev) if !exact && !prev.exact => Some((prev.l2_error / err).ln() / (prev.h / h).ln()),
            _ => None,
        };
        rows.push(ConvergenceRow { h, l2_error: err, order, exact, report });
    }
    Ok(rows)
}
