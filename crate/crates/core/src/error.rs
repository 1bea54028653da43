use thiserror::Error;

/// Errors raised anywhere in the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("missing required key `{0}`")]
    MissingKey(String),

    #[error("inadmissible state at node {node}: {reason}")]
    State { node: usize, reason: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("unsupported case: {0}")]
    Unsupported(String),

    #[error("singular diagonal block during assembly at node {node}")]
    Assembly { node: usize },

    #[error("factorization failed at node {node}: {reason}")]
    Factorization { node: usize, reason: String },

    #[error("singular block at node {node}")]
    SingularBlock { node: usize },

    #[error("linear solve produced a non-finite iterate at iteration {iteration}")]
    LinearDivergence { iteration: usize },

    #[error("divergence in {field} at RK stage {stage}")]
    Divergence { field: String, stage: usize },

    #[error("coarsening error: {0}")]
    Coarsening(String),

    #[error("no periodic state after {periods} periods (last relative change {change:e})")]
    NonPeriodic { periods: usize, change: f64 },

    #[error("comparison error: {0}")]
    Comparison(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
