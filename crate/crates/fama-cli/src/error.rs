//! CLI error categories and their process exit codes.

use fama_core::Error as CoreError;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration, flags, or domain-invalid field values (exit 2).
    Config(String),
    /// Numeric or accuracy failure inside the engine (exit 3).
    Numeric(String),
    /// Filesystem problem (exit 4).
    Io(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(msg: impl Into<String>) -> Self {
        CliError::Io(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numeric(_) => "numeric",
            CliError::Io(_) => "io",
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) | CliError::Numeric(m) | CliError::Io(m) => {
                write!(f, "error[{}]: {m}", self.category())
            }
        }
    }
}

impl std::error::Error for CliError {}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Domain(_) | CoreError::Format(_) => CliError::Config(e.to_string()),
            CoreError::Accuracy { .. } | CoreError::Numeric(_) | CoreError::Degenerate(_) => {
                CliError::Numeric(e.to_string())
            }
            CoreError::Io(err) => CliError::Io(err.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
