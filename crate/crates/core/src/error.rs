use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resource limit: {what} exceeds the configured cap {cap}")]
    ResourceLimit { what: String, cap: u64 },

    #[error("integer overflow: {0}")]
    Overflow(String),

    /// Quadrature refinement or a closure check did not converge; `diagnostics`
    /// carries the last estimates as name/value pairs.
    #[error("numerical failure: {message}")]
    NumericalFailure {
        message: String,
        diagnostics: Vec<(String, f64)>,
    },

    #[error("corrupt cache: {0}")]
    CorruptCache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LabError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        LabError::InvalidArgument(msg.into())
    }

    /// Stable machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            LabError::InvalidArgument(_) => "invalid-argument",
            LabError::ResourceLimit { .. } => "resource-limit",
            LabError::Overflow(_) => "overflow",
            LabError::NumericalFailure { .. } => "numerical-failure",
            LabError::CorruptCache(_) => "corrupt-cache",
            LabError::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
