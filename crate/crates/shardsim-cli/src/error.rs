use thiserror::Error;

/// Exit codes: 0 success, 2 config error, 3 I/O error, 4 size guard.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0}; reduce the game to at most 20 processors or use the simulation sweep instead")]
    SizeGuard(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::SizeGuard(_) => 4,
        }
    }
}
