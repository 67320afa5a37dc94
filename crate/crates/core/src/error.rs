use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum PtmError {
    #[error("invalid knot geometry: {0}")]
    InvalidGeometry(String),
    #[error("value {value} outside domain [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("penalty has {found} null-space eigenvalues, expected {expected}")]
    NullSpace { expected: usize, found: usize },
    #[error("non-positive variance {0}")]
    NonPositiveVariance(f64),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("root finding did not converge for target {0}")]
    Convergence(f64),
    #[error("degenerate covariate '{0}': zero range")]
    DegenerateCovariate(String),
    #[error("zero variance of standardized residuals")]
    ZeroVariance,
    #[error("non-finite value in observation {row}: {what}")]
    NonFinite { row: usize, what: String },
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("invalid configuration at '{path}': {message}")]
    Config { path: String, message: String },
    #[error("data error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Data { line: Option<u64>, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, PtmError>;

impl PtmError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        PtmError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn data(line: Option<u64>, message: impl Into<String>) -> Self {
        PtmError::Data {
            line,
            message: message.into(),
        }
    }
}
