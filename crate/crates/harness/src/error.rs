use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error(transparent)]
    Core(#[from] bmc_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{path}: {msg}")]
    Format { path: String, msg: String },
}

impl HarnessError {
    /// Usage problems (bad configuration) versus runtime failures.
    pub fn is_usage(&self) -> bool {
        matches!(self, HarnessError::Config { .. })
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
