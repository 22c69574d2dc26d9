use serde::Serialize;
use thiserror::Error;
use trapped::GeomError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;
pub const EXIT_CONFIG: i32 = 64;
pub const EXIT_UNKNOWN_ENTRY: i32 = 65;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error at `{key}`: {message}")]
    Config { key: String, message: String },
    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),
    #[error(transparent)]
    Geom(GeomError),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Body of the `error` report written to stderr.
#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub kind: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key: Option<String>,
    pub exit_code: i32,
}

impl CliError {
    pub fn config(key: &str, message: impl Into<String>) -> Self {
        CliError::Config { key: key.to_string(), message: message.into() }
    }

    /// Attributes a core error raised while building objects from the configuration.
    pub fn at(key: &str, e: GeomError) -> Self {
        match e {
            GeomError::UnknownEntry(name) => CliError::UnknownEntry(name),
            GeomError::InvalidReference(_)
            | GeomError::UnknownParam { .. }
            | GeomError::ParamOutOfRange { .. }
            | GeomError::IncompatibleChart { .. }
            | GeomError::DimensionMismatch { .. }
            | GeomError::InvalidGrid(_)
            | GeomError::InvalidTolerance { .. }
            | GeomError::InvalidMetric(_)
            | GeomError::InvalidEmbedding(_)
            | GeomError::InvalidFlow(_)
            | GeomError::Expr(_) => CliError::config(key, e.to_string()),
            other => CliError::Geom(other),
        }
    }

    pub fn key(&self) -> Option<&str> {
        match self {
            CliError::Config { key, .. } => Some(key),
            _ => None,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => EXIT_CONFIG,
            CliError::UnknownEntry(_) => EXIT_UNKNOWN_ENTRY,
            CliError::Geom(_) | CliError::Io(_) => EXIT_NUMERICAL,
        }
    }

    pub fn report(&self) -> ErrorReport {
        let kind = match self {
            CliError::Config { .. } => "ConfigError",
            CliError::UnknownEntry(_) => "UnknownEntry",
            CliError::Geom(e) => e.kind(),
            CliError::Io(_) => "Io",
        };
        ErrorReport {
            kind: kind.to_string(),
            message: self.to_string(),
            key: self.key().map(str::to_string),
            exit_code: self.exit_code(),
        }
    }
}

impl From<GeomError> for CliError {
    fn from(e: GeomError) -> Self {
        match e {
            GeomError::UnknownEntry(name) => CliError::UnknownEntry(name),
            other => CliError::Geom(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
