//! Errors surfaced by the command-line front end.

use std::path::PathBuf;

use adp_core::AdpError;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot parse row {row}, column \"{column}\": {value:?} is not a number")]
    Parse { row: u64, column: String, value: String },
    #[error("{0} has no data rows")]
    EmptyFile(PathBuf),
    #[error("malformed CSV in {path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] AdpError),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "ParseError",
            CliError::EmptyFile(_) => "EmptyFile",
            CliError::Csv { .. } => "CsvError",
            CliError::Io { .. } => "IoError",
            CliError::Config(_) => "ConfigError",
            CliError::Usage(_) => "UsageError",
            CliError::Core(e) => e.kind(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, e: std::io::Error) -> Self {
        CliError::Io { path: path.into(), message: e.to_string() }
    }

    /// Machine-readable form written to standard error.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            kind: &'a str,
            message: String,
        }
        #[derive(Serialize)]
        struct Envelope<'a> {
            error: Body<'a>,
        }
        serde_json::to_string(&Envelope { error: Body { kind: self.kind(), message: self.to_string() } })
            .expect("error envelope serializes")
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
