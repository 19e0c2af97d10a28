use std::path::PathBuf;
use std::process::ExitCode;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config {path}: {reason}")]
    Config { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] vdl_core::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    /// Every artifact was written but at least one check failed.
    #[error("{0}")]
    Failed(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 failed check, 2 usage or configuration, 3 numerical failure.
    pub fn exit_code(&self) -> ExitCode {
        use vdl_core::Error as E;
        let code = match self {
            Self::Failed(_) => 1,
            Self::Usage(_) | Self::Config { .. } | Self::Io { .. } | Self::Json(_) => 2,
            Self::Core(e) => match e {
                E::NonFinite { .. }
                | E::TimeStep { .. }
                | E::Blowup { .. }
                | E::VacuumMomentum { .. }
                | E::OutsideDomain { .. } => 3,
                _ => 2,
            },
        };
        ExitCode::from(code)
    }
}
