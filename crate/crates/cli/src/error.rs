use thiserror::Error;

/// Everything a command can fail with, mapped onto the documented exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad command line or config file.
    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] hql_core::Error),

    #[error("{0}")]
    Io(String),

    /// The command ran but some checked property failed.
    #[error("check failed: {0}")]
    CheckFailed(String),
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_OR_IO: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DOMAIN: u8 = 3;
pub const EXIT_SOLVER: u8 = 4;

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) if e.is_solver_failure() => EXIT_SOLVER,
            CliError::Core(hql_core::Error::Domain(_) | hql_core::Error::NonAdmissibleStart(_)) => EXIT_DOMAIN,
            CliError::Core(hql_core::Error::Format(_)) => EXIT_USAGE,
            CliError::Core(_) | CliError::Io(_) | CliError::CheckFailed(_) => EXIT_CHECK_OR_IO,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
