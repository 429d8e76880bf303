//! Surface syntax: AST, lexer, parser and pretty-printer.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;

pub use ast::*;
pub use parser::{
    parse_expr, parse_program, parse_sort, parse_static, parse_stype, parse_type, parse_type_in,
};
pub use pretty::{program_to_string, static_to_string, stype_to_string, term_to_string, type_to_string};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("{span}: {message}")]
    Syntax { span: Span, message: String },
    #[error("{span}: unbound name `{name}`")]
    UnboundName { span: Span, name: String },
}

impl ParseError {
    pub fn at(span: Span, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            span,
            message: message.into(),
        }
    }

    pub fn span(&self) -> Span {
        match self {
            ParseError::Syntax { span, .. } | ParseError::UnboundName { span, .. } => *span,
        }
    }

    /// Diagnostic code used by the checker and the CLI.
    pub fn code(&self) -> &'static str {
        match self {
            ParseError::Syntax { .. } => "parse-error",
            ParseError::UnboundName { .. } => "unbound-name",
        }
    }
}
