use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::estimates::{bilap_lhs_rhs, laplace_lhs_rhs, DerivativeProfile, EstimateTerms, TestShape};
use super::weight::CarlemanWeight;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::field::LogValue;
use crate::report::{csv_table, fmt_f64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "estimate")]
pub enum EstimateKind {
    Laplace { epsilon: f64 },
    Bilaplacian,
}

impl EstimateKind {
    pub fn epsilon(&self) -> f64 {
        match self {
            Self::Laplace { epsilon } => *epsilon,
            Self::Bilaplacian => 0.5,
        }
    }

    fn terms(&self, p: &DerivativeProfile, tau: f64, r: f64) -> Result<EstimateTerms> {
        match self {
            Self::Laplace { epsilon } => laplace_lhs_rhs(p, tau, r, &CarlemanWeight::new(*epsilon)?),
            Self::Bilaplacian => bilap_lhs_rhs(p, tau, r),
        }
    }

    fn lhs_count(&self) -> usize {
        match self {
            Self::Laplace { .. } => 3,
            Self::Bilaplacian => 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub kind: EstimateKind,
    pub seed: u64,
    pub family_size: usize,
    pub tau_grid: Vec<f64>,
    pub r_grid: Vec<f64>,
    /// Cylinder spacing in t.
    pub ht: f64,
    pub ntheta: usize,
}

impl SweepConfig {
    /// Seeded family of random annular shapes.
    pub fn family(&self) -> Vec<TestShape> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..self.family_size).map(|k| TestShape::random(format!("u{k:02}"), &mut rng)).collect()
    }

    pub fn refined(&self) -> Self {
        Self { ht: self.ht / 2.0, ntheta: 2 * self.ntheta, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub test_id: String,
    pub epsilon: f64,
    pub tau: f64,
    pub r: f64,
    pub terms: EstimateTerms,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepMax {
    pub tau: f64,
    pub r: f64,
    pub max_q: f64,
    pub argmax: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub family: Vec<TestShape>,
    pub rows: Vec<SweepRow>,
    pub maxima: Vec<SweepMax>,
}

/// Evaluates every `(shape, r, τ)` triple. Derivative profiles are computed
/// once per `(shape, r)` in parallel; rows come out sorted by
/// `(r, τ, test id)` regardless of scheduling.
pub fn ratio_sweep(family: &[TestShape], config: &SweepConfig, exec: Execution) -> Result<SweepReport> {
    if family.is_empty() || config.tau_grid.is_empty() || config.r_grid.is_empty() {
        return Err(Error::usage("sweep needs a nonempty family, tau grid and r grid"));
    }
    let jobs: Vec<(usize, usize)> =
        (0..config.r_grid.len()).flat_map(|ri| (0..family.len()).map(move |fi| (ri, fi))).collect();
    let results = exec.map(&jobs, |&(ri, fi)| -> Result<Vec<SweepRow>> {
        let r = config.r_grid[ri];
        let shape = &family[fi];
        let u = shape.at_scale(r)?;
        let grid = u.cylinder_grid(config.ht, config.ntheta)?;
        let profile = DerivativeProfile::new(&u.to_cylinder(&grid))?;
        config
            .tau_grid
            .iter()
            .map(|&tau| {
                Ok(SweepRow {
                    test_id: shape.id.clone(),
                    epsilon: config.kind.epsilon(),
                    tau,
                    r,
                    terms: config.kind.terms(&profile, tau, r)?,
                })
            })
            .collect()
    });
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    rows.sort_by(|a, b| {
        a.r.total_cmp(&b.r).then(a.tau.total_cmp(&b.tau)).then_with(|| a.test_id.cmp(&b.test_id))
    });
    let mut maxima: Vec<SweepMax> = Vec::new();
    for row in &rows {
        match maxima.last_mut() {
            Some(m) if m.tau == row.tau && m.r == row.r => {
                if row.terms.q > m.max_q {
                    m.max_q = row.terms.q;
                    m.argmax = row.test_id.clone();
                }
            }
            _ => maxima.push(SweepMax { tau: row.tau, r: row.r, max_q: row.terms.q, argmax: row.test_id.clone() }),
        }
    }
    Ok(SweepReport { config: config.clone(), family: family.to_vec(), rows, maxima })
}

impl SweepReport {
    pub fn max_q(&self) -> f64 {
        self.maxima.iter().map(|m| m.max_q).fold(0.0, f64::max)
    }

    /// Max Q for one `r` over the τ grid.
    pub fn max_q_at(&self, r: f64) -> f64 {
        self.maxima.iter().filter(|m| m.r == r).map(|m| m.max_q).fold(0.0, f64::max)
    }

    /// Columns `test_id, epsilon, tau, r`, then mantissa/exponent pairs for
    /// each LHS term and the RHS, `Q`, and each term's share of the LHS.
    pub fn to_csv(&self) -> String {
        let n = self.config.kind.lhs_count();
        let mut header: Vec<String> = ["test_id", "epsilon", "tau", "r"].iter().map(|s| s.to_string()).collect();
        for k in 0..n {
            header.push(format!("lhs_term_{k}_mantissa"));
            header.push(format!("lhs_term_{k}_exponent"));
        }
        header.extend(["rhs_mantissa".into(), "rhs_exponent".into(), "q".into()]);
        for k in 0..n {
            header.push(format!("share_{k}"));
        }
        let pair = |v: LogValue, out: &mut Vec<String>| {
            let (m, e) = v.parts();
            out.push(fmt_f64(m));
            out.push(fmt_f64(e));
        };
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|row| {
                let mut cells = vec![row.test_id.clone(), fmt_f64(row.epsilon), fmt_f64(row.tau), fmt_f64(row.r)];
                for v in &row.terms.lhs {
                    pair(*v, &mut cells);
                }
                pair(row.terms.rhs, &mut cells);
                cells.push(fmt_f64(row.terms.q));
                cells.extend(row.terms.shares().into_iter().map(fmt_f64));
                cells
            })
            .collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        csv_table(&header, &rows)
    }

    /// Seed, grids and per-(τ, r) maxima for the JSON sidecar.
    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "config": self.config,
            "family": self.family,
            "maxima": self.maxima,
            "max_q": self.max_q(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: EstimateKind) -> SweepConfig {
        SweepConfig { kind, seed: 5, family_size: 3, tau_grid: vec![4.0, 8.0], r_grid: vec![0.2], ht: 0.02, ntheta: 16 }
    }

    #[test]
    fn zero_family_reports_zeros() {
        let c = small(EstimateKind::Bilaplacian);
        let rep = ratio_sweep(&[TestShape::zero("z")], &c, Execution::Sequential).unwrap();
        assert!(rep.rows.iter().all(|r| r.terms.q == 0.0));
        assert_eq!(rep.max_q(), 0.0);
    }

    #[test]
    fn deterministic_across_execution_policies() {
        let c = small(EstimateKind::Laplace { epsilon: 0.5 });
        let fam = c.family();
        let a = ratio_sweep(&fam, &c, Execution::Sequential).unwrap().to_csv();
        let b = ratio_sweep(&fam, &c, Execution::Parallel).unwrap().to_csv();
        assert_eq!(a, b);
        assert_eq!(a.lines().count(), 1 + 3 * 2);
    }
}
