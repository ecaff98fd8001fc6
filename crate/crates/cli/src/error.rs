use std::path::PathBuf;

use faraday_core::Error as CoreError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_REGIME: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("unknown key `{path}`")]
    UnknownKey { path: String },
    #[error("unit error: {0}")]
    Unit(String),
    #[error("invalid override `{0}`: expected key=value")]
    Override(String),
    #[error("{context}: {source}")]
    Model {
        context: String,
        #[source]
        source: CoreError,
    },
    #[error("regime check failed: {0}")]
    Regime(String),
    #[error("columns of {path} have unequal or zero length")]
    LengthMismatch { path: PathBuf },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Manifest { path: PathBuf, message: String },
}

impl CliError {
    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema { .. } | CliError::UnknownKey { .. } | CliError::Unit(_) | CliError::Override(_) => {
                EXIT_CONFIG
            }
            CliError::Regime(_) => EXIT_REGIME,
            CliError::Model { source, .. } => match source {
                CoreError::RegimeViolation { .. } => EXIT_REGIME,
                CoreError::InvalidParams { .. }
                | CoreError::InvalidTolerance { .. }
                | CoreError::InvalidGrid(_)
                | CoreError::InvalidDopplerConfig(_)
                | CoreError::InvalidSliceCount
                | CoreError::ZeroCoupling
                | CoreError::ZeroProbe => EXIT_CONFIG,
                _ => EXIT_NUMERIC,
            },
            CliError::Manifest { .. } => EXIT_CONFIG,
            CliError::LengthMismatch { .. } | CliError::Io { .. } => EXIT_IO,
        }
    }
}

/// Attaches scenario context to a core error.
pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError>;
}

impl<T> Context<T> for Result<T, CoreError> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, CliError> {
        self.map_err(|source| CliError::Model {
            context: what(),
            source,
        })
    }
}
