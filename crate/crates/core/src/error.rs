use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TwirlError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian: max |A_jk - conj(A_kj)| = {violation:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { violation: f64, tolerance: f64 },
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid distribution: {0}")]
    Distribution(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("eigendecomposition failed: {0}")]
    Eigen(String),
}

pub type Result<T, E = TwirlError> = std::result::Result<T, E>;

/// Errors surfaced by the command-line layer, each mapped to an exit code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] TwirlError),
    #[error("check failed: {0}")]
    Failed(String),
}

impl CliError {
    pub fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Parse { location: location.into(), message: message.into() }
    }

    /// 1 for failed checks, 2 for bad input of any kind.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Failed(_) => 1,
            _ => 2,
        }
    }
}
