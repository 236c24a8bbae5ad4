use biconf_core::curvature::CurvatureError;
use biconf_core::einstein::EinsteinError;
use biconf_core::{FieldError, ParseError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_TOLERANCE: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("could not parse {what} {text:?}: {source}")]
    Parse {
        what: &'static str,
        text: String,
        source: ParseError,
    },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Parse { .. } | CliError::Io { .. } => EXIT_VALIDATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<CurvatureError> for CliError {
    fn from(e: CurvatureError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<EinsteinError> for CliError {
    fn from(e: EinsteinError) -> Self {
        match e {
            EinsteinError::InvalidParams(m) | EinsteinError::InvalidState(m) => {
                CliError::Validation(m.to_string())
            }
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(source: std::io::Error) -> Self {
        CliError::Io { path: "stream".into(), source }
    }
}
