use serde_json::{json, Value};
use thiserror::Error;

/// Failures that stop a command. Verdicts are never errors.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or malformed input, missing parameters. Exit code 2.
    #[error("{0}")]
    Input(String),
    /// A step, row or iteration cap was hit. Exit code 3.
    #[error("{0}")]
    Cap(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Cap(_) => 3,
        }
    }

    pub fn to_json(&self) -> Value {
        let kind = match self {
            CliError::Input(_) => "input",
            CliError::Cap(_) => "cap_exceeded",
        };
        json!({
            "tool": crate::report::tool(),
            "error": { "kind": kind, "exit_code": self.code(), "message": self.to_string() },
        })
    }
}
