use std::fmt;
use std::path::Path;

/// Everything the binary can fail with, split by exit class: config
/// problems (schema, range) exit 2, runtime problems (compute, io) exit 1.
/// All of them serialize to one machine-readable JSON line.
#[derive(Debug)]
pub enum CliError {
    Schema { path: String, message: String },
    Range { path: String, message: String },
    Compute(qw_core::Error),
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn range(path: &str, message: impl Into<String>) -> Self {
        CliError::Range {
            path: path.to_string(),
            message: message.into(),
        }
    }

    pub fn schema(path: &str, message: impl Into<String>) -> Self {
        CliError::Schema {
            path: path.to_string(),
            message: message.into(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Schema { .. } => "schema",
            CliError::Range { .. } => "range",
            CliError::Compute(_) => "compute",
            CliError::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema { .. } | CliError::Range { .. } => 2,
            CliError::Compute(_) | CliError::Io { .. } => 1,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let path = match self {
            CliError::Schema { path, .. } | CliError::Range { path, .. } => {
                serde_json::Value::String(path.clone())
            }
            CliError::Io { path, .. } => serde_json::Value::String(path.clone()),
            CliError::Compute(_) => serde_json::Value::Null,
        };
        let message = match self {
            CliError::Schema { message, .. } | CliError::Range { message, .. } => message.clone(),
            CliError::Compute(e) => e.to_string(),
            CliError::Io { source, .. } => source.to_string(),
        };
        serde_json::json!({
            "error": { "kind": self.kind(), "path": path, "message": message }
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Schema { path, message } => write!(f, "config schema error at {path}: {message}"),
            CliError::Range { path, message } => write!(f, "config range error at {path}: {message}"),
            CliError::Compute(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{path}: {source}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<qw_core::Error> for CliError {
    fn from(e: qw_core::Error) -> Self {
        CliError::Compute(e)
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
