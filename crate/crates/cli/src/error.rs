use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Numerical(cavprot_core::Error),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    /// 1 for anything the user can fix in the configuration, 2 when the
    /// numerics fail on a valid configuration.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(cavprot_core::Error::InvalidParameter { .. }) => 1,
            CliError::Numerical(_) => 2,
            CliError::Config(_) | CliError::Output(_) => 1,
        }
    }
}

impl From<cavprot_core::Error> for CliError {
    fn from(e: cavprot_core::Error) -> Self {
        CliError::Numerical(e)
    }
}
