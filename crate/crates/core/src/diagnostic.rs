use std::fmt;

use serde::{Deserialize, Serialize};

/// Closed set of problems a graph can have, from text extraction through
/// semantic validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DiagnosticCode {
    NoJsonFound,
    MalformedJson,
    SchemaViolation,
    BadNodeId,
    ConstantValueRule,
    MissingMirrorEdge,
    UnknownBlock,
    UnknownPort,
    TypeMismatch,
    SameDirectionConnection,
    DuplicateInputEdge,
    MissingRequiredInput,
    DanglingEdgeEndpoint,
    BadFieldValue,
    UndeclaredVariable,
    NoHatBlock,
    Orphan,
    CycleDetected,
}

impl DiagnosticCode {
    pub fn severity(self) -> Severity {
        match self {
            DiagnosticCode::Orphan => Severity::Warning,
            _ => Severity::Error,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticCode::NoJsonFound => "NoJsonFound",
            DiagnosticCode::MalformedJson => "MalformedJson",
            DiagnosticCode::SchemaViolation => "SchemaViolation",
            DiagnosticCode::BadNodeId => "BadNodeId",
            DiagnosticCode::ConstantValueRule => "ConstantValueRule",
            DiagnosticCode::MissingMirrorEdge => "MissingMirrorEdge",
            DiagnosticCode::UnknownBlock => "UnknownBlock",
            DiagnosticCode::UnknownPort => "UnknownPort",
            DiagnosticCode::TypeMismatch => "TypeMismatch",
            DiagnosticCode::SameDirectionConnection => "SameDirectionConnection",
            DiagnosticCode::DuplicateInputEdge => "DuplicateInputEdge",
            DiagnosticCode::MissingRequiredInput => "MissingRequiredInput",
            DiagnosticCode::DanglingEdgeEndpoint => "DanglingEdgeEndpoint",
            DiagnosticCode::BadFieldValue => "BadFieldValue",
            DiagnosticCode::UndeclaredVariable => "UndeclaredVariable",
            DiagnosticCode::NoHatBlock => "NoHatBlock",
            DiagnosticCode::Orphan => "Orphan",
            DiagnosticCode::CycleDetected => "CycleDetected",
        }
    }
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// One finding about a graph. Serializes to a single JSON object with
/// `code`, `message`, `node_ids` and `port_ids`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub message: String,
    pub node_ids: Vec<String>,
    pub port_ids: Vec<String>,
}

impl Diagnostic {
    pub fn new(code: DiagnosticCode, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            code,
            message: message.into(),
            node_ids: Vec::new(),
            port_ids: Vec::new(),
        }
    }

    pub fn nodes<I, S>(mut self, ids: I) -> Diagnostic
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.node_ids.extend(ids.into_iter().map(Into::into));
        self
    }

    pub fn ports<I, S>(mut self, ids: I) -> Diagnostic
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.port_ids.extend(ids.into_iter().map(Into::into));
        self
    }

    pub fn severity(&self) -> Severity {
        self.code.severity()
    }

    pub fn is_error(&self) -> bool {
        self.severity() == Severity::Error
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("diagnostic serializes")
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

/// True when any diagnostic has error severity.
pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(Diagnostic::is_error)
}
