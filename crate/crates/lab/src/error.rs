use std::path::PathBuf;

use morawetz_core::CoreError;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("config key `{key}`: {message}")]
    ConfigKey { key: String, message: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("could not parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl LabError {
    /// Process exit code by failure category.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) | LabError::ConfigKey { .. } | LabError::UnknownPreset(_) => 2,
            LabError::Parse { .. } => 2,
            LabError::Core(CoreError::InvalidGrid(_))
            | LabError::Core(CoreError::InvalidParams(_))
            | LabError::Core(CoreError::InadmissibleData(_))
            | LabError::Core(CoreError::InvalidStepper(_))
            | LabError::Core(CoreError::BoundaryReach { .. }) => 2,
            LabError::Core(_) => 3,
            LabError::Io { .. } | LabError::Serialize(_) => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
