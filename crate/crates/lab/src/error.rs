use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error in `{field}`{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config {
        field: String,
        line: Option<usize>,
        message: String,
    },

    #[error(transparent)]
    Core(#[from] irtr_core::Error),

    #[error("i/o error on {}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

impl LabError {
    pub fn config(
        field: impl Into<String>,
        line: Option<usize>,
        message: impl Into<String>,
    ) -> Self {
        LabError::Config {
            field: field.into(),
            line,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        LabError::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }

    /// 0 is success; 1 i/o, 2 configuration, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Io { .. } => 1,
            LabError::Config { .. } => 2,
            LabError::Core(e) if e.is_numerical() => 3,
            LabError::Core(_) => 2,
        }
    }
}

pub type LabResult<T> = std::result::Result<T, LabError>;
