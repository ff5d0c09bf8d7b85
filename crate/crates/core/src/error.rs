use std::fmt;

/// Every failure mode of the library. The `Display` form starts with the
/// stable kebab-case id returned by [`Error::id`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("stencil-out-of-domain: no {order}-order stencil fits at node (i={i}, j={j})")]
    StencilOutOfDomain { i: usize, j: usize, order: usize },
    #[error("empty-integration-region")]
    EmptyIntegrationRegion,
    #[error("region-outside-mask: node (i={i}, j={j}) has quadrature weight but is unmasked")]
    RegionOutsideMask { i: usize, j: usize },
    #[error("weight-singularity-on-support: log weight is {value} at node (i={i}, j={j})")]
    WeightSingularityOnSupport { i: usize, j: usize, value: f64 },
    #[error("negative-integrand: {value} at node (i={i}, j={j})")]
    NegativeIntegrand { i: usize, j: usize, value: f64 },
    #[error("cutoff-scale-order: need 0 < r < R0/2 < 1/2, got r={r}, R0={outer}")]
    CutoffScaleOrder { r: f64, outer: f64 },
    #[error("invalid-grid: {0}")]
    InvalidGrid(String),
    #[error("shape-mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite-value: masked node (i={i}, j={j})")]
    NonFiniteValue { i: usize, j: usize },

    #[error("material-denominator: mu+lambda = {value} at (x={x}, y={y})")]
    MaterialDenominator { x: f64, y: f64, value: f64 },
    #[error("strong-convexity-violated: margins (mu-alpha0={mu_margin}, 2mu+3lambda-gamma0={gamma_margin}) worst at (x={x}, y={y})")]
    StrongConvexityViolated { mu_margin: f64, gamma_margin: f64, x: f64, y: f64 },

    #[error("assembly-degenerate: {0}")]
    AssemblyDegenerate(String),
    #[error("singular-system: zero pivot in column {column}")]
    SingularSystem { column: usize },
    #[error("solver-stagnation: residual {residual:e} after {iterations} iterations")]
    SolverStagnation { iterations: usize, residual: f64 },

    #[error("not-clamped: max |u(x,0)| = {value:e}, max |u_y(x,0)| = {slope:e}, tolerance {tol:e}")]
    NotClamped { value: f64, slope: f64, tol: f64 },
    #[error("singular-row: row {row} lies within 2h of y=0")]
    SingularRow { row: usize },

    #[error("weight-singular-point: weight evaluated at the origin")]
    WeightSingularPoint,
    #[error("hardy-precondition: f(0) = {value}")]
    HardyPrecondition { value: f64 },
    #[error("support-truncation: |f| = {value:e} within two cells of the t-grid end")]
    SupportTruncation { value: f64 },
    #[error("support-violation: {0}")]
    SupportViolation(String),
    #[error("rhs-underflow: right-hand side of the estimate vanished")]
    RhsUnderflow,

    #[error("map-inversion-failure: Newton failed at {} node(s), first {:?}", nodes.len(), nodes.first())]
    MapInversionFailure { nodes: Vec<(usize, usize)> },
    #[error("degenerate-jacobian-node: |grad| = {value:e} at node (i={i}, j={j})")]
    DegenerateJacobianNode { i: usize, j: usize, value: f64 },
    #[error("pullback-out-of-domain: image of node (i={i}, j={j}) is outside the field mask")]
    PullbackOutOfDomain { i: usize, j: usize },

    #[error("vanishing-denominator: {0}")]
    VanishingDenominator(String),
    #[error("lemma-scale-order: need 0 < 2r < R < R0bar/2, got r={r}, R={big_r}, R0bar={r0bar}")]
    LemmaScaleOrder { r: f64, big_r: f64, r0bar: f64 },
    #[error("vanishing-trace: the 2-mean of |D^3 v| on the interval is zero")]
    VanishingTrace,

    #[error("usage: {0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(String),
    #[error("parse: {0}")]
    Parse(String),
}

impl Error {
    /// Stable identifier, identical to the prefix of the display string.
    pub fn id(&self) -> &'static str {
        match self {
            Error::StencilOutOfDomain { .. } => "stencil-out-of-domain",
            Error::EmptyIntegrationRegion => "empty-integration-region",
            Error::RegionOutsideMask { .. } => "region-outside-mask",
            Error::WeightSingularityOnSupport { .. } => "weight-singularity-on-support",
            Error::NegativeIntegrand { .. } => "negative-integrand",
            Error::CutoffScaleOrder { .. } => "cutoff-scale-order",
            Error::InvalidGrid(_) => "invalid-grid",
            Error::ShapeMismatch(_) => "shape-mismatch",
            Error::NonFiniteValue { .. } => "non-finite-value",
            Error::MaterialDenominator { .. } => "material-denominator",
            Error::StrongConvexityViolated { .. } => "strong-convexity-violated",
            Error::AssemblyDegenerate(_) => "assembly-degenerate",
            Error::SingularSystem { .. } => "singular-system",
            Error::SolverStagnation { .. } => "solver-stagnation",
            Error::NotClamped { .. } => "not-clamped",
            Error::SingularRow { .. } => "singular-row",
            Error::WeightSingularPoint => "weight-singular-point",
            Error::HardyPrecondition { .. } => "hardy-precondition",
            Error::SupportTruncation { .. } => "support-truncation",
            Error::SupportViolation(_) => "support-violation",
            Error::RhsUnderflow => "rhs-underflow",
            Error::MapInversionFailure { .. } => "map-inversion-failure",
            Error::DegenerateJacobianNode { .. } => "degenerate-jacobian-node",
            Error::PullbackOutOfDomain { .. } => "pullback-out-of-domain",
            Error::VanishingDenominator(_) => "vanishing-denominator",
            Error::LemmaScaleOrder { .. } => "lemma-scale-order",
            Error::VanishingTrace => "vanishing-trace",
            Error::Usage(_) => "usage",
            Error::Io(_) => "io",
            Error::Parse(_) => "parse",
        }
    }

    pub(crate) fn usage(msg: impl fmt::Display) -> Self {
        Error::Usage(msg.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
