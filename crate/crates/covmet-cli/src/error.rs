use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] covmet::Error),
    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for bad input, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Model(
                covmet::Error::InvalidParameter(_)
                | covmet::Error::NonFinite(_)
                | covmet::Error::InvalidExpansion(_)
                | covmet::Error::Parse(_)
                | covmet::Error::InvalidBracket { .. },
            ) => 2,
            _ => 1,
        }
    }
}
