use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invariant check failed: {0}")]
    Invariant(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    /// 0 success, 1 invariant failure, 2 configuration error, 3 I/O error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invariant(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<loattack_core::Error> for CliError {
    fn from(e: loattack_core::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
