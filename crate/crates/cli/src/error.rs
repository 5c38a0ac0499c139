use conewave::Error;
use thiserror::Error as ThisError;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numerical failure in {module}: {detail}")]
    Numerical { module: &'static str, detail: String },
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io(_) => 1,
        }
    }

    pub fn numerical(module: &'static str, detail: impl Into<String>) -> Self {
        CliError::Numerical { module, detail: detail.into() }
    }

    /// Sorts a library error into validation or numerical failure.
    pub fn from_core(module: &'static str, e: Error) -> Self {
        match e {
            Error::Divergence { .. } | Error::PartialTrack(_) => {
                CliError::Numerical { module, detail: e.to_string() }
            }
            _ => CliError::Validation(format!("{module}: {e}")),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
