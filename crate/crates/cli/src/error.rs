use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or arguments; exit code 2.
    #[error("invalid configuration: {0}")]
    Validation(String),

    /// The simulation ran but flagged a failure; exit code 1.
    #[error("run failed: {0}")]
    Runtime(String),

    /// A trajectory diverged; partial outputs were written. Exit code 1.
    #[error("simulation blew up: {0}")]
    BlowUp(String),

    #[error(transparent)]
    Io(#[from] anyhow::Error),
}

impl CliError {
    pub fn field(path: &str, reason: impl std::fmt::Display) -> Self {
        CliError::Validation(format!("field `{path}`: {reason}"))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) | CliError::BlowUp(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<tcsim_core::Error> for CliError {
    fn from(e: tcsim_core::Error) -> Self {
        use tcsim_core::Error as E;
        match e {
            E::InvalidParameter { .. } | E::Precondition(_) | E::TooLarge { .. } | E::DuplicateSeed(_) => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}
