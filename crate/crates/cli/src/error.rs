use ergavg_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] Error),
    #[error("refused: {0}")]
    Refused(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    /// 2 when a run is refused for a failing ergodicity certificate, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Refused(_) | CliError::Core(Error::NotErgodic { .. }) => 2,
            _ => 1,
        }
    }
}
