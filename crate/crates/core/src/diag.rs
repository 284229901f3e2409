//! Structured diagnostics shared by every validation pass.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Diagnostic codes. Errors start with `E_`, warnings with `W_`.
pub mod codes {
    pub const E_SYNTAX: &str = "E_SYNTAX";
    pub const E_SCHEMA: &str = "E_SCHEMA";
    pub const E_REF: &str = "E_REF";
    pub const E_DUPLICATE_ID: &str = "E_DUPLICATE_ID";
    pub const E_DOMAIN_TAG: &str = "E_DOMAIN_TAG";
    pub const E_DOMAIN_MISMATCH: &str = "E_DOMAIN_MISMATCH";
    pub const E_EMPTY_SET: &str = "E_EMPTY_SET";
    pub const E_OUI_NOT_IN_SUT: &str = "E_OUI_NOT_IN_SUT";
    pub const E_FUI_NOT_IN_FUT: &str = "E_FUI_NOT_IN_FUT";
    pub const E_DOI_UNUSED: &str = "E_DOI_UNUSED";
    pub const E_FUT_OUTSIDE_SUT: &str = "E_FUT_OUTSIDE_SUT";
    pub const E_RANGE: &str = "E_RANGE";
    pub const E_PATH_UNRESOLVED: &str = "E_PATH_UNRESOLVED";
    pub const E_SUBTEST_SCOPE: &str = "E_SUBTEST_SCOPE";
    pub const E_PORT: &str = "E_PORT";
    pub const E_UNMATCHED_PORT: &str = "E_UNMATCHED_PORT";
    pub const E_CYCLE: &str = "E_CYCLE";
    pub const E_INCOMPATIBLE: &str = "E_INCOMPATIBLE";
    pub const E_TAXONOMY_MISMATCH: &str = "E_TAXONOMY_MISMATCH";
    pub const E_COVERAGE: &str = "E_COVERAGE";
    pub const E_CUT: &str = "E_CUT";
    pub const E_ASSEMBLY: &str = "E_ASSEMBLY";
    pub const E_OUI_UNCOVERED: &str = "E_OUI_UNCOVERED";
    pub const E_INFEASIBLE: &str = "E_INFEASIBLE";
    pub const E_PLAN: &str = "E_PLAN";
    pub const E_MISSING_ARTIFACT: &str = "E_MISSING_ARTIFACT";
    pub const E_EXECUTOR: &str = "E_EXECUTOR";
    pub const E_NONNUMERIC_RANGE: &str = "E_NONNUMERIC_RANGE";
    pub const E_SWEEP: &str = "E_SWEEP";
    pub const E_EXPR_SYNTAX: &str = "E_EXPR_SYNTAX";
    pub const E_EXPR_REF: &str = "E_EXPR_REF";
    pub const E_POI_MISMATCH: &str = "E_POI_MISMATCH";

    pub const W_UNKNOWN_DOMAIN: &str = "W_UNKNOWN_DOMAIN";
    pub const W_UNKNOWN_FIELD: &str = "W_UNKNOWN_FIELD";
    pub const W_APPROXIMATE: &str = "W_APPROXIMATE";
    pub const W_NO_CROSSING: &str = "W_NO_CROSSING";
    pub const W_INCOMPLETE: &str = "W_INCOMPLETE";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

impl Severity {
    pub const fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        }
    }
}

/// One finding, addressed by a slash-separated document path such as
/// `/connections/2/from`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Diagnostic {
    pub code: &'static str,
    pub severity: Severity,
    pub path: String,
    pub line: Option<u32>,
    pub col: Option<u32>,
    pub message: String,
}

impl Diagnostic {
    /// Builds a diagnostic whose severity is implied by the code prefix.
    pub fn new(code: &'static str, path: impl Into<String>, message: impl Into<String>) -> Self {
        let severity = if code.starts_with("W_") {
            Severity::Warning
        } else {
            Severity::Error
        };
        Diagnostic {
            code,
            severity,
            path: path.into(),
            line: None,
            col: None,
            message: message.into(),
        }
    }

    pub fn at(mut self, line: u32, col: u32) -> Self {
        self.line = Some(line);
        self.col = Some(col);
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.severity.as_str(), self.code, self.path)?;
        if let (Some(line), Some(col)) = (self.line, self.col) {
            write!(f, ":{line}:{col}")?;
        }
        write!(f, ": {}", self.message)
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}

/// A failed operation: one or more error diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure(pub Vec<Diagnostic>);

impl Failure {
    pub fn one(code: &'static str, path: impl Into<String>, message: impl Into<String>) -> Self {
        Failure(alloc::vec![Diagnostic::new(code, path, message)])
    }

    pub fn has_code(&self, code: &str) -> bool {
        self.0.iter().any(|d| d.code == code)
    }
}

impl From<Diagnostic> for Failure {
    fn from(d: Diagnostic) -> Self {
        Failure(alloc::vec![d])
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn severity_follows_prefix() {
        assert!(Diagnostic::new(codes::E_REF, "/", "x").is_error());
        assert!(!Diagnostic::new(codes::W_APPROXIMATE, "/", "x").is_error());
    }
}
