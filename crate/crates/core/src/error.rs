use thiserror::Error;

/// Errors produced by the centrality, norm, transport and certificate routines.
#[derive(Debug, Clone, Error)]
pub enum FpcError {
    /// An argument is outside the domain of the operation.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// An exhaustive search was requested above its size threshold.
    #[error("size limit exceeded for {what}: n = {n}, limit = {limit}{}", hint.as_deref().map(|h| format!(" ({h})")).unwrap_or_default())]
    SizeLimit {
        what: &'static str,
        n: usize,
        limit: usize,
        hint: Option<String>,
    },

    /// An iterative method ran out of budget. Carries the last iterate.
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        last_iterate: Vec<f64>,
    },

    #[error("numerical error: {0}")]
    Numerical(String),

    /// The leading eigenvalue is not separated from the rest of the spectrum.
    #[error("leading eigenvalue is not simple: gap {gap:e} below {threshold:e}")]
    SimplicityViolation { gap: f64, threshold: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A hypothesis required by a bound does not hold for the given inputs.
    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, FpcError>;

impl From<std::io::Error> for FpcError {
    fn from(e: std::io::Error) -> Self {
        FpcError::Io(e.to_string())
    }
}

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(FpcError::Parameter(msg.into()))
}
