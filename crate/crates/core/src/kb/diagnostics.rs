use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl Location {
    pub fn new(line: usize, column: usize) -> Self {
        Location { line, column }
    }
}

impl Default for Location {
    fn default() -> Self {
        Location { line: 1, column: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceDiagnostic {
    pub severity: Severity,
    pub location: Location,
    pub code: String,
    pub message: String,
}

impl SourceDiagnostic {
    pub fn error(location: Location, code: &str, message: impl Into<String>) -> Self {
        SourceDiagnostic {
            severity: Severity::Error,
            location,
            code: code.to_string(),
            message: message.into(),
        }
    }

    pub fn warning(location: Location, code: &str, message: impl Into<String>) -> Self {
        SourceDiagnostic {
            severity: Severity::Warning,
            ..Self::error(location, code, message)
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// `file:line:col: severity code message`
    pub fn render(&self, file: &str) -> String {
        format!(
            "{file}:{}:{}: {} {} {}",
            self.location.line, self.location.column, self.severity, self.code, self.message
        )
    }
}

impl fmt::Display for SourceDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {} {} {}",
            self.location.line, self.location.column, self.severity, self.code, self.message
        )
    }
}

pub mod codes {
    pub const SYNTAX_ERROR: &str = "syntax-error";
    pub const DUPLICATE_ID: &str = "duplicate-id";
    pub const UNKNOWN_KEYWORD: &str = "unknown-keyword";
    pub const UNKNOWN_VALUE: &str = "unknown-value";
    pub const INERT_ATOM: &str = "inert-atom";
}
