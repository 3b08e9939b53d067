use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows} x {cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix must have at least 2 states, got {0}")]
    TooSmall(usize),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric (max |M - M^T| = {residual:e})")]
    Asymmetric { residual: f64 },

    #[error("eigensolver did not converge")]
    EigenNoConvergence,

    #[error("matrix exponential overflows at t = {t} (growth rate {rate})")]
    Overflow { t: f64, rate: f64 },

    #[error("degenerate spectral gap: second eigenvalue {lambda2:e} is not strictly negative")]
    SpectralGap { lambda2: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid signed distribution: {0}")]
    InvalidDistribution(String),

    #[error("preparation basis is rank deficient (smallest singular value {sigma_min:e})")]
    RankDeficient { sigma_min: f64 },

    #[error("observed matrix is singular (smallest singular value {sigma_min:e})")]
    SingularObservation { sigma_min: f64 },

    #[error("unusable fit: residual {residual:e} exceeds eps_fit {eps_fit:e}")]
    UnusableFit { residual: f64, eps_fit: f64 },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("output format `{format}` is not supported by `{command}`")]
    UnsupportedFormat { command: String, format: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
