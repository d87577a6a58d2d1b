//! Diagnostics with source spans.

use std::fmt;
use std::sync::Arc;

use serde_json::json;

/// Source location. Spans never take part in structural equality: two nodes
/// that differ only in where they were written compare equal.
#[derive(Clone, Default)]
pub struct Span {
    pub file: Arc<str>,
    /// 1-based line.
    pub line: u32,
    /// 1-based column, counted in characters.
    pub column: u32,
    /// Byte offset of the first byte.
    pub offset: usize,
    /// Length in bytes.
    pub len: usize,
}

impl Span {
    pub fn end(&self) -> usize {
        self.offset + self.len
    }

    /// Smallest span covering `self` and `other` (same file assumed).
    pub fn to(&self, other: &Span) -> Span {
        if other.end() <= self.offset {
            return self.clone();
        }
        Span {
            len: other.end().max(self.end()) - self.offset,
            ..self.clone()
        }
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl fmt::Debug for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
    Note,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Note => "note",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub code: &'static str,
    pub severity: Severity,
    pub span: Span,
    pub message: String,
}

impl Diagnostic {
    pub fn error(code: &'static str, span: &Span, message: impl Into<String>) -> Self {
        Diagnostic {
            code,
            severity: Severity::Error,
            span: span.clone(),
            message: message.into(),
        }
    }

    pub fn warning(code: &'static str, span: &Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            ..Diagnostic::error(code, span, message)
        }
    }

    pub fn note(code: &'static str, span: &Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Note,
            ..Diagnostic::error(code, span, message)
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// `path:line:col: severity: message [code]`
    pub fn human(&self) -> String {
        if self.span.file.is_empty() {
            return format!("{}: {} [{}]", self.severity.as_str(), self.message, self.code);
        }
        format!(
            "{}:{}:{}: {}: {} [{}]",
            self.span.file,
            self.span.line,
            self.span.column,
            self.severity.as_str(),
            self.message,
            self.code
        )
    }

    /// One JSON object per line.
    pub fn record(&self) -> String {
        json!({
            "code": self.code,
            "severity": self.severity.as_str(),
            "span": {
                "file": &*self.span.file,
                "line": self.span.line,
                "column": self.span.column,
                "offset": self.span.offset,
                "length": self.span.len,
            },
            "message": self.message,
        })
        .to_string()
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.human())
    }
}

/// Stable order: file, then offset, then code.
pub fn sort(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| {
        a.span
            .file
            .cmp(&b.span.file)
            .then(a.span.offset.cmp(&b.span.offset))
            .then(a.code.cmp(b.code))
            .then(a.message.cmp(&b.message))
    });
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}

/// Diagnostic codes.
pub mod codes {
    /// Malformed input: unexpected token, bad literal, unterminated string or comment.
    pub const SYNTAX: &str = "S1";
    /// A data_analytics block written after the statechart.
    pub const DA_ORDER: &str = "S2";
    /// Two top-level declarations with the same name.
    pub const DUPLICATE_TOP: &str = "S3";
    /// More than one statechart in a thing.
    pub const MULTIPLE_CHARTS: &str = "S4";
    /// A data_analytics parameter given twice.
    pub const DUPLICATE_PARAM: &str = "S5";

    /// Reference to an undeclared name.
    pub const UNKNOWN: &str = "R1";
    /// Name declared twice (including across fragment merge).
    pub const DUPLICATE: &str = "R2";
    /// Fragment include cycle.
    pub const INCLUDE_CYCLE: &str = "R3";
    /// Instance of a fragment.
    pub const FRAGMENT_INSTANCE: &str = "R4";
    /// Value outside a closed vocabulary (family, scaler, algorithm).
    pub const UNKNOWN_KIND: &str = "R5";

    pub const V1: &str = "V1";
    pub const V2: &str = "V2";
    pub const V3: &str = "V3";
    pub const V4: &str = "V4";
    pub const V5: &str = "V5";
    pub const V6: &str = "V6";
    pub const C1: &str = "C1";
    pub const C2: &str = "C2";
    pub const C3: &str = "C3";
    pub const C4: &str = "C4";
    pub const C5: &str = "C5";
    pub const C6: &str = "C6";
    /// Several components write the same prediction property.
    pub const SHARED_PREDICTION: &str = "W1";
    /// AutoML filled in a parameter.
    pub const AUTOML: &str = "N1";
}
