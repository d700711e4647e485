//! The `.qs` text format, report emission, and command dispatch.

pub mod elaborate;
pub mod lexer;
pub mod report;
pub mod run;
pub mod syntax;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use elaborate::{describe, elaborate, Elaborated};
pub use lexer::Span;
pub use report::{render, Format, Report, SCHEMA_VERSION};
pub use run::{parse_nbar, parse_params, run, run_source, Command, ParamAssignment, RunFlags};
pub use syntax::{parse, parse_expr, print, SystemDescription};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiagnosticKind {
    Lexical,
    Syntax,
    Semantic,
    Oracle,
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiagnosticKind::Lexical => "lexical",
            DiagnosticKind::Syntax => "syntax",
            DiagnosticKind::Semantic => "semantic",
            DiagnosticKind::Oracle => "oracle",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Error)]
#[error("{line}:{col}: {kind} error: {message}")]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl Diagnostic {
    pub fn new(kind: DiagnosticKind, span: Span, message: String) -> Self {
        Diagnostic {
            kind,
            line: span.line,
            col: span.col,
            message,
        }
    }
}
