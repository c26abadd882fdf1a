//! Surface language for generated robot programs: extraction from raw
//! completions, a parser for the Python-syntax subset, and a budgeted
//! tree-walking interpreter over a pluggable skill host.

pub mod ast;
#[cfg(test)]
mod differential;
mod extract;
mod interp;
mod parser;
mod token;
pub mod value;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use ast::{Ast, Span};
pub use extract::{extract_program, ExtractionError};
pub use interp::{execute, ExecutionOutcome, SkillHost};

/// Default step budget: bounds any fixture run well under 100 ms while
/// leaving room for loops over every room.
pub const DEFAULT_STEP_BUDGET: u64 = 100_000;

/// A program text plus a provenance tag (prompt id, sample index, backend).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceProgram {
    pub text: String,
    pub origin: String,
}

impl SourceProgram {
    pub fn new(text: impl Into<String>, origin: impl Into<String>) -> Self {
        SourceProgram {
            text: text.into(),
            origin: origin.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InterpreterErrorKind {
    Syntax,
    Name,
    Type,
    Value,
    Index,
    Key,
    Attribute,
    ZeroDivision,
    Timeout,
    Unsupported,
}

impl InterpreterErrorKind {
    /// Error name in the style of the source language family.
    pub fn label(self) -> &'static str {
        match self {
            InterpreterErrorKind::Syntax => "SyntaxError",
            InterpreterErrorKind::Name => "NameError",
            InterpreterErrorKind::Type => "TypeError",
            InterpreterErrorKind::Value => "ValueError",
            InterpreterErrorKind::Index => "IndexError",
            InterpreterErrorKind::Key => "KeyError",
            InterpreterErrorKind::Attribute => "AttributeError",
            InterpreterErrorKind::ZeroDivision => "ZeroDivisionError",
            InterpreterErrorKind::Timeout => "TimeoutError",
            InterpreterErrorKind::Unsupported => "UnsupportedError",
        }
    }

    pub fn parse_label(label: &str) -> Option<Self> {
        Some(match label {
            "SyntaxError" | "Syntax" => InterpreterErrorKind::Syntax,
            "NameError" | "Name" => InterpreterErrorKind::Name,
            "TypeError" | "Type" => InterpreterErrorKind::Type,
            "ValueError" | "Value" => InterpreterErrorKind::Value,
            "IndexError" | "Index" => InterpreterErrorKind::Index,
            "KeyError" | "Key" => InterpreterErrorKind::Key,
            "AttributeError" | "Attribute" => InterpreterErrorKind::Attribute,
            "ZeroDivisionError" | "ZeroDivision" => InterpreterErrorKind::ZeroDivision,
            "TimeoutError" | "Timeout" => InterpreterErrorKind::Timeout,
            "UnsupportedError" | "Unsupported" => InterpreterErrorKind::Unsupported,
            _ => return None,
        })
    }
}

impl fmt::Display for InterpreterErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpreterError {
    pub kind: InterpreterErrorKind,
    pub message: String,
    pub span: Span,
}

impl fmt::Display for InterpreterError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({})", self.kind.label(), self.message, self.span)
    }
}

impl std::error::Error for InterpreterError {}

/// Parses a program into a syntax tree. `kind = Syntax` means the text
/// failed to parse; `kind = Unsupported` names a construct outside the
/// subset.
pub fn parse(source: &SourceProgram) -> Result<Ast, InterpreterError> {
    parser::parse_module(&source.text)
}
