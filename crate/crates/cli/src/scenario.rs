//! Scenario files: TOML with optional `[grid]`, `[material]` and `[graph]`
//! tables and exactly one `[experiment.<name>]` block.

use std::path::{Path, PathBuf};

use platelab_core::expr::Expr;
use platelab_core::field::io::read_field;
use platelab_core::field::{GridSpec, ScalarField};
use platelab_core::plate::LameField;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

pub const EXPERIMENTS: [&str; 7] = ["material-check", "solve", "reflect", "carleman", "conformal", "doubling", "identities"];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub seed: Option<u64>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub grid: GridConfig,
    pub material: Option<MaterialConfig>,
    pub graph: Option<GraphConfig>,
    #[serde(default)]
    pub experiment: ExperimentBlocks,
    /// Directory of the scenario file; relative CSV paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("platelab-out")
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub h: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { x: [-1.0, 1.0], y: [0.0, 1.0], h: 1.0 / 64.0 }
    }
}

impl GridConfig {
    pub fn spec(&self) -> CliResult<GridSpec> {
        GridSpec::with_spacing((self.x[0], self.x[1]), (self.y[0], self.y[1]), self.h)
            .map_err(|e| CliError::config("grid", e))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    pub lambda: Option<String>,
    pub lambda_csv: Option<PathBuf>,
    pub mu: Option<String>,
    pub mu_csv: Option<PathBuf>,
    pub thickness: f64,
    pub alpha0: f64,
    pub gamma0: f64,
    pub lambda0: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    /// `g(x) = Σ c_k x^(k+2)`
    pub coefficients: Vec<f64>,
    pub r0: f64,
    pub m0: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentBlocks {
    pub material_check: Option<MaterialCheckParams>,
    pub solve: Option<SolveParams>,
    pub reflect: Option<ReflectParams>,
    pub carleman: Option<CarlemanParams>,
    pub conformal: Option<ConformalParams>,
    pub doubling: Option<DoublingParams>,
    pub identities: Option<IdentitiesParams>,
}

#[derive(Debug, Clone)]
pub enum Experiment {
    MaterialCheck(MaterialCheckParams),
    Solve(SolveParams),
    Reflect(ReflectParams),
    Carleman(CarlemanParams),
    Conformal(ConformalParams),
    Doubling(DoublingParams),
    Identities(IdentitiesParams),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::MaterialCheck(_) => "material-check",
            Experiment::Solve(_) => "solve",
            Experiment::Reflect(_) => "reflect",
            Experiment::Carleman(_) => "carleman",
            Experiment::Conformal(_) => "conformal",
            Experiment::Doubling(_) => "doubling",
            Experiment::Identities(_) => "identities",
        }
    }

    fn needs_seed(&self) -> bool {
        matches!(self, Experiment::Carleman(_) | Experiment::Identities(_))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialCheckParams {
    /// Field on which the two forms of the operator are compared.
    #[serde(default = "default_probe")]
    pub probe: String,
    #[serde(default = "yes")]
    pub refine: bool,
    #[serde(default = "default_min_order")]
    pub min_order: f64,
}

fn default_probe() -> String {
    "x^2*y^2 + sin(x)*y^3".into()
}

fn default_min_order() -> f64 {
    1.8
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveParams {
    #[serde(default = "default_case")]
    pub case: String,
    /// Cells per unit length on each nested grid.
    #[serde(default = "default_levels")]
    pub levels: Vec<usize>,
    #[serde(default = "yes")]
    pub dump: bool,
}

fn default_case() -> String {
    "y2-sin".into()
}

fn default_levels() -> Vec<usize> {
    vec![16, 32, 64]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReflectParams {
    pub field: String,
    #[serde(default = "default_gap_tol")]
    pub gap_tol: f64,
    #[serde(default = "default_trace_factor")]
    pub trace_factor: f64,
    #[serde(default = "default_clamp_rtol")]
    pub clamp_rtol: f64,
}

fn default_gap_tol() -> f64 {
    5e-3
}

fn default_trace_factor() -> f64 {
    5.0
}

fn default_clamp_rtol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarlemanParams {
    #[serde(default = "default_estimate")]
    pub estimate: String,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_family")]
    pub family_size: usize,
    #[serde(default = "default_taus")]
    pub taus: Vec<f64>,
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    #[serde(default = "default_ht")]
    pub ht: f64,
    #[serde(default = "default_ntheta")]
    pub ntheta: usize,
    #[serde(default)]
    pub refine: bool,
    pub baseline: Option<f64>,
    #[serde(default = "default_factor")]
    pub factor: f64,
}

fn default_estimate() -> String {
    "bilaplacian".into()
}

fn default_epsilon() -> f64 {
    0.5
}

fn default_family() -> usize {
    20
}

fn default_taus() -> Vec<f64> {
    vec![4.0, 8.0, 16.0, 32.0]
}

fn default_radii() -> Vec<f64> {
    vec![0.05, 0.1, 0.2]
}

fn default_ht() -> f64 {
    0.004
}

fn default_ntheta() -> usize {
    64
}

fn default_factor() -> f64 {
    1.1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConformalParams {
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "yes")]
    pub dump: bool,
    #[serde(default = "default_spread")]
    pub max_ratio_spread: f64,
}

fn default_n() -> usize {
    64
}

fn default_spread() -> f64 {
    3.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoublingParams {
    /// `"reference"` for the solver-generated plate solution, otherwise an
    /// expression in `x`, `y` sampled on `[grid]`.
    pub field: String,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default)]
    pub center: [f64; 2],
    #[serde(default = "default_r0")]
    pub r0: f64,
    #[serde(default = "default_c_art")]
    pub c_art: f64,
    /// Exact doubling ratio to compare against, e.g. 64 for `y^2`.
    pub expected: Option<f64>,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_variation")]
    pub max_variation: f64,
    pub lemma: Option<LemmaConfig>,
}

fn default_half_width() -> f64 {
    0.5
}

fn default_r0() -> f64 {
    1.0
}

fn default_c_art() -> f64 {
    platelab_core::doubling::DEFAULT_C_ART
}

fn default_rtol() -> f64 {
    0.03
}

fn default_variation() -> f64 {
    0.10
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmaConfig {
    pub r: f64,
    pub big_r: f64,
    pub r0_bar: f64,
    pub taus: Vec<f64>,
    /// Radius for the end-to-end chain; omitted skips the chain.
    pub chain_r: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentitiesParams {
    #[serde(default = "default_identity_levels")]
    pub levels: Vec<usize>,
    #[serde(default = "default_profiles")]
    pub hardy_profiles: usize,
    #[serde(default = "default_identity_tol")]
    pub gap_tol: f64,
}

fn default_identity_levels() -> Vec<usize> {
    vec![64, 128]
}

fn default_profiles() -> usize {
    100
}

fn default_identity_tol() -> f64 {
    0.02
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    /// `dotted.key=value`; the value is read as a TOML value, or as a bare
    /// string when it does not parse.
    pub set: Vec<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

fn parse_value(text: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {text}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(text.to_string()))
}

fn set_path(table: &mut toml::Table, key: &str, value: toml::Value) -> CliResult<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::config(key, "empty segment in override key"));
    }
    let mut cur = table;
    for (k, part) in parts.iter().enumerate() {
        if k + 1 == parts.len() {
            cur.insert(part.to_string(), value);
            return Ok(());
        }
        let entry = cur.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::config(parts[..=k].join("."), "override descends into a non-table value"))?;
    }
    Ok(())
}

impl Scenario {
    pub fn from_str_with(text: &str, overrides: &Overrides) -> CliResult<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::config("<file>", e.message()))?;
        for item in &overrides.set {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--set expects key=value, got {item:?}")))?;
            set_path(&mut table, key.trim(), parse_value(value.trim()))?;
        }
        if let Some(seed) = overrides.seed {
            let seed = i64::try_from(seed).map_err(|_| CliError::config("seed", "seed exceeds 2^63-1"))?;
            table.insert("seed".into(), toml::Value::Integer(seed));
        }
        if let Some(out) = &overrides.out {
            table.insert("out".into(), toml::Value::String(out.to_string_lossy().into_owned()));
        }
        let scenario: Scenario = serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
            let path = e.path().to_string();
            CliError::config(if path == "." { "<root>".into() } else { path }, e.into_inner().message())
        })?;
        scenario.experiment()?;
        Ok(scenario)
    }

    pub fn load(path: &Path, overrides: &Overrides) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let mut s = Self::from_str_with(&text, overrides)?;
        s.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(s)
    }

    /// The single experiment block.
    pub fn experiment(&self) -> CliResult<Experiment> {
        let b = self.experiment.clone();
        let mut found: Vec<Experiment> = [
            b.material_check.map(Experiment::MaterialCheck),
            b.solve.map(Experiment::Solve),
            b.reflect.map(Experiment::Reflect),
            b.carleman.map(Experiment::Carleman),
            b.conformal.map(Experiment::Conformal),
            b.doubling.map(Experiment::Doubling),
            b.identities.map(Experiment::Identities),
        ]
        .into_iter()
        .flatten()
        .collect();
        let exp = match found.len() {
            0 => return Err(CliError::config("experiment", format!("no experiment block; expected one of {EXPERIMENTS:?}"))),
            1 => found.remove(0),
            _ => {
                let names: Vec<&str> = found.iter().map(Experiment::name).collect();
                return Err(CliError::config("experiment", format!("exactly one block allowed, found {names:?}")));
            }
        };
        if exp.needs_seed() && self.seed.is_none() {
            return Err(CliError::config("seed", format!("the {} experiment draws a random family and needs a seed", exp.name())));
        }
        Ok(exp)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn lame(&self, grid: &GridSpec) -> CliResult<LameField> {
        let m = self.material.as_ref().ok_or_else(|| CliError::config("material", "missing [material] table"))?;
        let field = |name: &str, expr: &Option<String>, csv: &Option<PathBuf>| -> CliResult<ScalarField> {
            match (expr, csv) {
                (Some(e), None) => {
                    let f = expression(&format!("material.{name}"), e)?;
                    Ok(ScalarField::from_fn(grid, |x, y| f.eval(x, y)))
                }
                (None, Some(p)) => {
                    let f = read_field(&self.base_dir.join(p), None)?;
                    if !f.grid().same_as(grid) {
                        return Err(CliError::config(format!("material.{name}_csv"), "field grid differs from [grid]"));
                    }
                    Ok(f)
                }
                _ => Err(CliError::config(format!("material.{name}"), format!("give exactly one of `{name}` and `{name}_csv`"))),
            }
        };
        Ok(LameField {
            lambda: field("lambda", &m.lambda, &m.lambda_csv)?,
            mu: field("mu", &m.mu, &m.mu_csv)?,
            thickness: m.thickness,
            alpha0: m.alpha0,
            gamma0: m.gamma0,
            lambda0: m.lambda0,
        })
    }
}

pub fn expression(path: &str, text: &str) -> CliResult<Expr> {
    text.parse::<Expr>().map_err(|e| CliError::config(path, e))
}
