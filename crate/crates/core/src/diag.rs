//! Source positions and compile diagnostics.

use alloc::string::String;
use core::fmt;

/// A region of source text. `line` and `col` are 1-based and refer to `start`.
///
/// Spans never participate in structural equality: two syntax trees that
/// differ only in positions compare equal.
#[derive(Clone, Copy, Debug, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Span {
    pub fn to(self, other: Span) -> Span {
        Span {
            start: self.start,
            end: other.end.max(self.end),
            line: self.line,
            col: self.col,
        }
    }

    /// True if the span lies within a source text of `len` bytes.
    pub fn within(&self, len: usize) -> bool {
        self.start <= self.end && self.end <= len && self.line >= 1 && self.col >= 1
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Lex,
    Parse,
    Typecheck,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Lex => "lex",
            Stage::Parse => "parse",
            Stage::Typecheck => "typecheck",
        })
    }
}

/// A positioned compile error.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{stage} error at {span}: {message}")]
pub struct Diagnostic {
    pub stage: Stage,
    pub span: Span,
    pub message: String,
}

impl Diagnostic {
    pub fn new(stage: Stage, span: Span, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            stage,
            span,
            message: message.into(),
        }
    }
}
