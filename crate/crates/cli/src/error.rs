use serde_json::json;
use spinaxion_core::Error as CoreError;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const NUMERIC: i32 = 3;
    pub const IO: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}: {message}", fields.join(", "))]
    Config { fields: Vec<String>, message: String },
    #[error("{0}")]
    Numeric(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            fields: vec![field.into()],
            message: message.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => exit::CONFIG,
            CliError::Numeric(_) => exit::NUMERIC,
            CliError::Io { .. } => exit::IO,
        }
    }

    /// Single-line JSON record written to stderr on failure.
    pub fn to_json(&self) -> String {
        let body = match self {
            CliError::Config { fields, message } => json!({
                "kind": "config",
                "fields": fields,
                "message": message,
            }),
            CliError::Numeric(message) => json!({ "kind": "numeric", "message": message }),
            CliError::Io { path, message } => json!({
                "kind": "io",
                "path": path,
                "message": message,
            }),
        };
        json!({ "error": body, "exit_code": self.exit_code() }).to_string()
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter { field, reason } => CliError::Config {
                fields: vec![field],
                message: reason,
            },
            CoreError::Nyquist { ref what, .. } => CliError::Config {
                fields: vec![what.clone()],
                message: e.to_string(),
            },
            CoreError::Inconsistent { fields, reason } => CliError::Config {
                fields,
                message: reason,
            },
            CoreError::Io(err) => CliError::Io {
                path: String::new(),
                message: err.to_string(),
            },
            CoreError::Format(message) => CliError::Io {
                path: String::new(),
                message,
            },
            other => CliError::Numeric(other.to_string()),
        }
    }
}
