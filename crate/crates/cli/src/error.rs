use thiserror::Error;

/// Command failure, grouped by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration file or parameter value.
    #[error("configuration error: {0}")]
    Config(String),
    /// Flags that do not fit the command.
    #[error("usage error: {0}")]
    Usage(String),
    /// The computation ran but its result is not trustworthy.
    #[error("diagnostic: {0}")]
    Diagnostic(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Diagnostic(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<hrc_risk::Error> for CliError {
    fn from(e: hrc_risk::Error) -> Self {
        if e.is_diagnostic() {
            CliError::Diagnostic(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
