use gaga::GagaError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Estimator(#[from] GagaError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("config: {0}")]
    Config(String),
}

impl HarnessError {
    /// Short identifier used in status columns and on stderr.
    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Estimator(e) => e.kind(),
            HarnessError::Io(_) => "Io",
            HarnessError::Csv(_) => "Csv",
            HarnessError::Config(_) => "Config",
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
