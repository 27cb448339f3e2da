use thiserror::Error;

pub type Result<T, E = FinslerError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FinslerError {
    /// A function was evaluated outside its domain (log/sqrt of a
    /// non-positive value, division by ~0, point outside the metric's domain).
    #[error("domain error in {op}: {detail}")]
    Domain { op: String, detail: String },

    #[error("derivative order {requested} exceeds jet order {max}")]
    Order { requested: usize, max: usize },

    #[error("fundamental tensor not positive definite (min eigenvalue {min_eigenvalue:e})")]
    NotStronglyConvex { min_eigenvalue: f64 },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("insufficient resolution: spectral tail {tail:e} exceeds {limit:e}")]
    Resolution { tail: f64, limit: f64 },

    #[error("degenerate linear system: {0}")]
    Rank(String),

    #[error("metric construction failed: {0}")]
    Construction(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical inconsistency: {0}")]
    Inconsistency(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl FinslerError {
    pub(crate) fn domain(op: &str, detail: impl Into<String>) -> Self {
        FinslerError::Domain {
            op: op.to_string(),
            detail: detail.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            FinslerError::Parse { .. } | FinslerError::Config(_) | FinslerError::Io(_) => 2,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for FinslerError {
    fn from(e: std::io::Error) -> Self {
        FinslerError::Io(e.to_string())
    }
}
