use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("duplicate points at rows {first} and {second}")]
    DuplicatePoints { first: usize, second: usize },

    #[error("neighbour order k={k} requires at least k+1 points, got {n}")]
    Arity { k: usize, n: usize },

    #[error("sample size {n} is outside the supported range {min}..={max}")]
    SampleSize { n: usize, min: usize, max: usize },

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("density is not normalised on the truncated support: mass = {mass}")]
    InconsistentDensity { mass: f64 },

    #[error("matrix is not symmetric positive definite")]
    Decomposition,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("critical value lookup failed: {0}")]
    Lookup(String),

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("quadrature did not converge: estimate {estimate}, error bound {error}")]
    Quadrature { estimate: f64, error: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
