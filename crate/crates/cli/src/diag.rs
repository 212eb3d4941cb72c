//! Machine-readable failures: every error leaves the process as one JSON
//! object on stderr and a fixed exit code.

use std::fmt;

use rfss_core::Error as CoreError;
use serde_json::{json, Value};

/// Exit code for invalid input (arguments, files, netlists).
pub const EXIT_INPUT: i32 = 2;
/// Exit code for numeric failures (singular systems, failed syntheses).
pub const EXIT_NUMERIC: i32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
    pub context: Value,
    pub exit_code: i32,
}

impl CliError {
    pub fn input(code: &'static str, message: impl Into<String>, context: Value) -> Self {
        CliError {
            code,
            message: message.into(),
            context,
            exit_code: EXIT_INPUT,
        }
    }

    pub fn numeric(code: &'static str, message: impl Into<String>, context: Value) -> Self {
        CliError {
            code,
            message: message.into(),
            context,
            exit_code: EXIT_NUMERIC,
        }
    }

    pub fn io(path: &str, err: &std::io::Error) -> Self {
        Self::input("io", err.to_string(), json!({ "path": path }))
    }

    /// JSON parse failure in `text`, located by byte offset.
    pub fn json(path: &str, text: &str, err: &serde_json::Error) -> Self {
        let offset = byte_offset(text, err.line(), err.column());
        Self::input(
            "invalid-json",
            err.to_string(),
            json!({ "path": path, "byte_offset": offset, "line": err.line(), "column": err.column() }),
        )
    }

    pub fn to_json(&self) -> Value {
        json!({ "code": self.code, "message": self.message, "context": self.context })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

impl std::error::Error for CliError {}

/// Byte offset of a 1-based line and column as reported by serde_json.
pub fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let start: usize = text.split_inclusive('\n').take(line - 1).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let message = e.to_string();
        let (inner, frequency) = match e {
            CoreError::AtFrequency { frequency, source } => (*source, Some(frequency)),
            other => (other, None),
        };
        let mut context = json!({});
        if let Some(f) = frequency {
            context["frequency_hz"] = json!(f);
        }
        match inner {
            CoreError::InvalidNetlist(diags) => {
                context["diagnostics"] = serde_json::to_value(&diags).unwrap_or(Value::Null);
                Self::input("invalid-netlist", message, context)
            }
            CoreError::SingularSystem {
                frequency,
                condition,
                nodes,
            } => {
                context["frequency_hz"] = json!(frequency);
                context["condition"] = if condition.is_finite() {
                    json!(condition)
                } else {
                    json!("inf")
                };
                context["nodes"] = json!(nodes);
                Self::numeric("singular-system", message, context)
            }
            CoreError::InvalidParameter { name, .. } => {
                context["parameter"] = json!(name);
                Self::input("invalid-parameter", message, context)
            }
            CoreError::InvalidFrequency(f) => {
                context["frequency_hz"] = json!(f);
                Self::input("invalid-frequency", message, context)
            }
            CoreError::Unknown { what, name } => {
                context["what"] = json!(what);
                context["name"] = json!(name);
                Self::input("unknown-reference", message, context)
            }
            CoreError::PortCount { found, .. } => {
                context["ports"] = json!(found);
                Self::input("port-count", message, context)
            }
            CoreError::NoInputNoise => Self::input("no-input-noise", message, context),
            CoreError::SingularConversion { from, to } => {
                context["from"] = json!(from);
                context["to"] = json!(to);
                Self::numeric("singular-conversion", message, context)
            }
            CoreError::ZeroSourceContribution(_) => Self::numeric("zero-source-noise", message, context),
            CoreError::NoMatchSolution(_) => Self::numeric("no-match-solution", message, context),
            CoreError::Metrics(_) => Self::numeric("metrics", message, context),
            CoreError::Domain(_) | CoreError::AtFrequency { .. } => Self::numeric("numeric", message, context),
        }
    }
}
