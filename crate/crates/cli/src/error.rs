use std::path::{Path, PathBuf};

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    /// A file was read but its contents are invalid.
    #[error("{}: {source}", path.display())]
    Input { path: PathBuf, source: padfair_core::Error },

    #[error("{}: {message}", path.display())]
    Image { path: PathBuf, message: String },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] padfair_core::Error),
}

/// Machine-readable form printed with `--error-json`.
#[derive(Debug, Serialize)]
pub struct ErrorReport<'a> {
    pub code: &'a str,
    pub message: String,
    pub exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<&'a Path>,
}

impl CliError {
    pub fn io(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
        move |source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn input(path: &Path) -> impl FnOnce(padfair_core::Error) -> CliError + '_ {
        move |source| match source {
            padfair_core::Error::Io(source) => CliError::Io {
                path: path.to_path_buf(),
                source,
            },
            source => CliError::Input {
                path: path.to_path_buf(),
                source,
            },
        }
    }

    pub fn usage(e: padfair_core::Error) -> CliError {
        CliError::Usage(e.to_string())
    }

    /// 2 for I/O, parse and argument failures, 1 for computations that are
    /// undefined on valid inputs.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Input { .. } | CliError::Image { .. } | CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_input_error() || matches!(e, padfair_core::Error::InvalidArgument(_)) => 2,
            CliError::Core(_) => 1,
        }
    }

    pub fn code(&self) -> &str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Input { source, .. } => source.code(),
            CliError::Image { .. } => "image",
            CliError::Usage(_) => "usage",
            CliError::Core(e) => e.code(),
        }
    }

    pub fn path(&self) -> Option<&Path> {
        match self {
            CliError::Io { path, .. } | CliError::Input { path, .. } | CliError::Image { path, .. } => Some(path),
            _ => None,
        }
    }

    pub fn report(&self) -> ErrorReport<'_> {
        ErrorReport {
            code: self.code(),
            message: self.to_string(),
            exit_code: self.exit_code(),
            path: self.path(),
        }
    }
}
