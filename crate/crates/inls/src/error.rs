use thiserror::Error;

/// Errors surfaced by grid construction, functional evaluation and the
/// time integrator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("grid too small: need at least {need} nodes, got {got}")]
    GridTooSmall { need: usize, got: usize },

    #[error("unsupported singularity exponent kappa = {0}; require kappa < 2")]
    UnsupportedSingularity(f64),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("root bracketing failed: {0}")]
    BracketFailure(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("regime violation: {0}")]
    RegimeViolation(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
