use thiserror::Error;

/// Errors raised by the estimators, kernels and generators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GagaError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionError(String),

    /// Penalized system `XᵀX + B` failed to factor.
    #[error("penalized system is not positive definite (pivot {pivot})")]
    SingularSystem { pivot: usize },

    /// Unpenalized `XᵀX` is singular, so the truncation threshold is undefined.
    #[error("gram matrix is singular (pivot {pivot})")]
    SingularGram { pivot: usize },

    #[error("design is rank deficient at column {column}")]
    RankDeficient { column: usize },

    #[error("alpha must be greater than 1, got {0}")]
    InvalidAlpha(f64),

    #[error("correlation matrix is not positive definite (pivot {pivot})")]
    InvalidCorrelation { pivot: usize },

    #[error("invalid size: {0}")]
    InvalidSize(String),
}

impl GagaError {
    /// Stable machine-readable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            GagaError::InvalidInput(_) => "InvalidInput",
            GagaError::DimensionError(_) => "DimensionError",
            GagaError::SingularSystem { .. } => "SingularSystem",
            GagaError::SingularGram { .. } => "SingularGram",
            GagaError::RankDeficient { .. } => "RankDeficient",
            GagaError::InvalidAlpha(_) => "InvalidAlpha",
            GagaError::InvalidCorrelation { .. } => "InvalidCorrelation",
            GagaError::InvalidSize(_) => "InvalidSize",
        }
    }
}

pub type Result<T, E = GagaError> = std::result::Result<T, E>;
