use thiserror::Error;

/// Errors produced by the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("jet context mismatch: ({0} vars, order {1}) vs ({2} vars, order {3})")]
    ContextMismatch(usize, usize, usize, usize),

    #[error("invalid variable index {index} for context with {num_vars} variables")]
    InvalidVariable { index: usize, num_vars: usize },

    #[error("division by jet with zero constant term")]
    DivisionByZero,

    #[error("domain violation: {func} evaluated at constant term {value}")]
    Domain { func: &'static str, value: f64 },

    #[error("singular constant-term matrix")]
    SingularMatrix,

    #[error("chart `{chart}` is invalid: {reason}")]
    InvalidChart { chart: String, reason: String },

    #[error("point {point:?} lies outside the chart box")]
    PointOutsideBox { point: Vec<f64> },

    #[error("omega is degenerate at the sample point (|det| = {det:.3e})")]
    DegenerateOmega { det: f64 },

    #[error("compatibility violation at the sample point: {check} residual {residual:.3e}")]
    Compatibility { check: &'static str, residual: f64 },

    #[error("metric is not positive definite at the sample point")]
    NotPositiveDefinite,

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("deformation field `{name}` is not in sp(TM, omega): residual {residual:.3e}")]
    NotSymplectic { name: String, residual: f64 },

    #[error("volume density is not positive at {point:?}: {value:.3e}")]
    NonPositiveDensity { point: Vec<f64>, value: f64 },

    #[error("quadrature evaluation failed at point {point:?}: {source}")]
    QuadratureEval {
        point: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown example `{0}`")]
    UnknownExample(String),

    #[error("report mismatch: {0}")]
    ReportMismatch(String),

    #[error("malformed config: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
