use std::path::Path;

use serde::Serialize;

/// A failed run, printed to stderr as `{"error": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CliError {
    pub kind: String,
    pub message: String,
    /// JSON pointer into the config or the report, when one applies.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pointer: Option<String>,
}

impl CliError {
    pub fn new(kind: impl Into<String>, message: impl Into<String>) -> Self {
        CliError { kind: kind.into(), message: message.into(), pointer: None }
    }

    pub fn at(mut self, pointer: impl Into<String>) -> Self {
        self.pointer = Some(pointer.into());
        self
    }

    pub fn internal(message: impl Into<String>) -> Self {
        CliError::new("internal", message)
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError::new("usage", message)
    }

    pub fn non_finite(pointer: &str) -> Self {
        CliError::new("non_finite", "result contains a non-finite number").at(pointer)
    }

    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::new("io", format!("{}: {e}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl From<weierstrass_lab::Error> for CliError {
    fn from(e: weierstrass_lab::Error) -> Self {
        CliError::new(e.kind(), e.to_string())
    }
}

/// Core errors raised while validating a config record point at the record.
pub trait AtPointer<T> {
    fn at(self, pointer: &str) -> Result<T, CliError>;
}

impl<T> AtPointer<T> for Result<T, weierstrass_lab::Error> {
    fn at(self, pointer: &str) -> Result<T, CliError> {
        self.map_err(|e| CliError::from(e).at(pointer))
    }
}
