use std::fmt;

use magpi_core::{Diagnostic, Span};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TypingVerdict {
    Accepted,
    Rejected,
}

/// One rule application, in the order the derivation was built.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub rule: &'static str,
    pub span: Span,
}

/// Invariant: `Rejected` iff `failures` is nonempty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypingReport {
    pub verdict: TypingVerdict,
    pub failures: Vec<Diagnostic>,
    pub trace: Vec<TraceStep>,
}

#[derive(Serialize)]
struct FailureJson<'a> {
    code: &'a str,
    span: Span,
    message: &'a str,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    verdict: TypingVerdict,
    failures: Vec<FailureJson<'a>>,
    trace: &'a [TraceStep],
}

impl TypingReport {
    pub fn new(failures: Vec<Diagnostic>, trace: Vec<TraceStep>) -> TypingReport {
        let verdict = if failures.is_empty() {
            TypingVerdict::Accepted
        } else {
            TypingVerdict::Rejected
        };
        TypingReport {
            verdict,
            failures,
            trace,
        }
    }

    pub fn accepted(&self) -> bool {
        self.verdict == TypingVerdict::Accepted
    }

    pub fn codes(&self) -> Vec<&str> {
        self.failures.iter().map(|d| d.code.as_str()).collect()
    }

    /// `{verdict, failures:[{code,span,message}], trace:[{rule,span}]}`
    pub fn to_json(&self) -> String {
        let json = ReportJson {
            verdict: self.verdict,
            failures: self
                .failures
                .iter()
                .map(|d| FailureJson {
                    code: &d.code,
                    span: d.span,
                    message: &d.message,
                })
                .collect(),
            trace: &self.trace,
        };
        serde_json::to_string_pretty(&json).expect("report serializes")
    }
}

impl fmt::Display for TypingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.verdict {
            TypingVerdict::Accepted => writeln!(f, "accepted ({} rule applications)", self.trace.len()),
            TypingVerdict::Rejected => {
                writeln!(f, "rejected")?;
                for d in &self.failures {
                    writeln!(f, "{d}")?;
                }
                Ok(())
            }
        }
    }
}
