//! Expression grammar, pretty-printer and the operator/transformation file formats.
//!
//! The exact grammar is written out in `FORMATS.md` at the repository root.

mod files;
mod parser;
mod printer;

pub use files::{parse_operator_file, parse_transformation_file, OperatorFile, TransformationFile};
pub use parser::{parse_expr, VarSet};
pub use printer::format_expr;

use std::fmt;

use crate::expr::ExprError;

/// Byte range plus the 1-based line and column of its start.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub begin: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownSymbol(String),
    Math(ExprError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: SourceSpan,
}

impl ParseError {
    pub(crate) fn syntax(msg: impl Into<String>, span: SourceSpan) -> Self {
        ParseError {
            kind: ParseErrorKind::Syntax(msg.into()),
            span,
        }
    }

    pub(crate) fn unknown_symbol(name: &str, span: SourceSpan) -> Self {
        ParseError {
            kind: ParseErrorKind::UnknownSymbol(name.to_string()),
            span,
        }
    }

    pub(crate) fn math(err: ExprError, span: SourceSpan) -> Self {
        ParseError {
            kind: ParseErrorKind::Math(err),
            span,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.span;
        let at = format!(
            "line {}, column {} (bytes {}..{})",
            s.line, s.column, s.begin, s.end
        );
        match &self.kind {
            ParseErrorKind::Syntax(m) => write!(f, "syntax error at {at}: {m}"),
            ParseErrorKind::UnknownSymbol(n) => write!(f, "unknown symbol `{n}` at {at}"),
            ParseErrorKind::Math(e) => write!(f, "{e} at {at}"),
        }
    }
}

impl std::error::Error for ParseError {}
