use serde_json::{json, Map, Value};
use wglab::LabError;

/// Failure record written to stderr as one JSON line.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: String,
    /// Name of the violated precondition, when there is one.
    pub condition: Option<String>,
    pub message: String,
    pub diagnostics: Vec<(String, f64)>,
}

impl CliError {
    pub fn invalid(condition: &str, message: impl Into<String>) -> Self {
        Self {
            kind: "invalid-argument".into(),
            condition: Some(condition.into()),
            message: message.into(),
            diagnostics: Vec::new(),
        }
    }

    pub fn missing(flag: &str, command: &str) -> Self {
        Self::invalid(
            &format!("{flag}-required"),
            format!("--{flag} is required for `{command}`"),
        )
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            kind: "io".into(),
            condition: None,
            message: message.into(),
            diagnostics: Vec::new(),
        }
    }

    pub fn check_failed(message: impl Into<String>) -> Self {
        Self {
            kind: "check-failed".into(),
            condition: None,
            message: message.into(),
            diagnostics: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Value {
        let mut err = Map::new();
        err.insert("kind".into(), json!(self.kind));
        if let Some(c) = &self.condition {
            err.insert("condition".into(), json!(c));
        }
        err.insert("message".into(), json!(self.message));
        if !self.diagnostics.is_empty() {
            let d: Map<String, Value> = self
                .diagnostics
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number)))
                .collect();
            err.insert("diagnostics".into(), Value::Object(d));
        }
        json!({ "error": err })
    }
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        let kind = e.kind().to_string();
        let message = e.to_string();
        match e {
            LabError::NumericalFailure { diagnostics, .. } => Self {
                kind,
                condition: None,
                message,
                diagnostics,
            },
            LabError::InvalidArgument(m) => Self {
                kind,
                condition: Some(m),
                message,
                diagnostics: Vec::new(),
            },
            _ => Self {
                kind,
                condition: None,
                message,
                diagnostics: Vec::new(),
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.kind, self.message)
    }
}

impl std::error::Error for CliError {}
