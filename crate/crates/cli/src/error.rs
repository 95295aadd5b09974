use std::path::{Path, PathBuf};

use thiserror::Error;

/// Process exit codes, one per failure class.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const INTERNAL: u8 = 1;
    /// Also what clap uses for malformed command lines.
    pub const PARSE: u8 = 2;
    pub const IO: u8 = 3;
    pub const PRECONDITION: u8 = 4;
    pub const RESOURCE_GUARD: u8 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot parse {what}: {message}")]
    Parse { what: String, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Precondition(String),

    #[error("{0}")]
    ResourceGuard(String),

    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<CliError>,
    },

    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn parse(what: impl Into<String>, message: impl ToString) -> Self {
        CliError::Parse { what: what.into(), message: message.to_string() }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    /// Maps a core error raised while handling `path`.
    pub fn core_at(path: &Path, e: sve_core::Error) -> Self {
        match e {
            sve_core::Error::Io(source) => CliError::io(path, source),
            sve_core::Error::Format(m) => CliError::parse(path.display().to_string(), m),
            other => CliError::Precondition(format!("{}: {other}", path.display())),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse { .. } => exit::PARSE,
            CliError::Io { .. } => exit::IO,
            CliError::Precondition(_) => exit::PRECONDITION,
            CliError::ResourceGuard(_) => exit::RESOURCE_GUARD,
            CliError::Stage { source, .. } => source.exit_code(),
            CliError::Internal(_) => exit::INTERNAL,
        }
    }
}

impl From<sve_core::Error> for CliError {
    fn from(e: sve_core::Error) -> Self {
        match e {
            sve_core::Error::Io(source) => CliError::Io { path: PathBuf::new(), source },
            sve_core::Error::Format(m) => CliError::parse("input", m),
            other => CliError::Precondition(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Attaches a pipeline stage name to errors.
pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> CliResult<T>;
}

impl<T, E: Into<CliError>> StageExt<T> for std::result::Result<T, E> {
    fn stage(self, stage: &'static str) -> CliResult<T> {
        self.map_err(|e| CliError::Stage { stage, source: Box::new(e.into()) })
    }
}
