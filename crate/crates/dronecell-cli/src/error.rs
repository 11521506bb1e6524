use dronecell::dist::ParameterError;
use dronecell::rate::RateError;
use std::fmt;

/// Failure classes with distinct exit codes: bad input is the caller's
/// problem (exit 1), a numerical routine giving up is ours (exit 2).
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ParameterError> for CliError {
    fn from(e: ParameterError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<RateError> for CliError {
    fn from(e: RateError) -> Self {
        match e {
            RateError::Invalid(p) => CliError::Usage(p.to_string()),
            nc @ RateError::NonConvergence { .. } => CliError::Numerical(nc.to_string()),
        }
    }
}
