use std::fmt;

use thiserror::Error;

/// Faults raised while evaluating a program. There is no in-language catch;
/// programs that want recoverable failure write an exception handler.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuntimeError {
    #[error("unhandled operation {0}")]
    UnhandledOperation(String),
    #[error("index out of bounds: index {index} on table of length {len}")]
    IndexOutOfBounds { index: i64, len: usize },
    #[error("applied non-function: {0}")]
    AppliedNonFunction(String),
    #[error("for size not a non-negative integer: {0}")]
    BadLoopSize(String),
    #[error("state table length mismatch: loop of size {expected}, state {found}")]
    StateTableMismatch { expected: usize, found: String },
    #[error("cannot compare functions")]
    CompareFunctions,
    #[error("reduce of empty table")]
    ReduceEmpty,
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("division by zero")]
    DivisionByZero,
    /// A builtin received arguments it cannot handle.
    #[error("{builtin}: {message}")]
    Builtin {
        builtin: &'static str,
        message: String,
    },
    #[error("{0}")]
    Type(String),
}

impl RuntimeError {
    pub(crate) fn builtin(builtin: &'static str, message: impl Into<String>) -> RuntimeError {
        RuntimeError::Builtin {
            builtin,
            message: message.into(),
        }
    }
}

/// Source position, 1-based.
#[derive(Debug, Clone, Copy, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

/// Positions never take part in AST equality.
impl PartialEq for Pos {
    fn eq(&self, _: &Pos) -> bool {
        true
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Parse or desugar failure.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{pos}: {message}{}", expected_suffix(.expected))]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected one of: {})", expected.join(", "))
    }
}

impl ParseError {
    pub fn new(pos: Pos, message: impl Into<String>) -> ParseError {
        ParseError {
            pos,
            message: message.into(),
            expected: Vec::new(),
        }
    }
}
