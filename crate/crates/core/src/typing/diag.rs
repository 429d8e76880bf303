use std::fmt;

use serde::Serialize;

use crate::solver::Verdict;
use crate::statics::StaticError;
use crate::syntax::ast::{Span, Static};
use crate::syntax::ParseError;

/// A structured checker diagnostic.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub code: String,
    pub span: Option<Span>,
    pub message: String,
    pub guard: Option<String>,
    #[serde(rename = "solverVerdict")]
    pub solver_verdict: Option<String>,
}

impl Diagnostic {
    pub fn new(code: &str, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            code: code.to_string(),
            span: None,
            message: message.into(),
            guard: None,
            solver_verdict: None,
        }
    }

    pub fn with_guard(mut self, guard: &Static, verdict: &Verdict) -> Diagnostic {
        self.guard = Some(guard.to_string());
        self.solver_verdict = Some(verdict.to_string());
        self
    }

    pub fn at(mut self, span: Option<Span>) -> Diagnostic {
        if self.span.is_none() {
            self.span = span;
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("diagnostics serialize")
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.span {
            Some(sp) => write!(f, "{}: error[{}]: {}", sp, self.code, self.message)?,
            None => write!(f, "error[{}]: {}", self.code, self.message)?,
        }
        if let Some(g) = &self.guard {
            write!(f, " (guard `{}`", g)?;
            if let Some(v) = &self.solver_verdict {
                write!(f, ": {}", v)?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostic {}

impl From<StaticError> for Diagnostic {
    fn from(e: StaticError) -> Diagnostic {
        Diagnostic::new(e.code, e.message)
    }
}

impl From<ParseError> for Diagnostic {
    fn from(e: ParseError) -> Diagnostic {
        let span = e.span();
        let message = match &e {
            ParseError::Syntax { message, .. } => message.clone(),
            ParseError::UnboundName { name, .. } => format!("unbound name `{}`", name),
        };
        Diagnostic::new(e.code(), message).at(Some(span))
    }
}

pub type TResult<T> = Result<T, Diagnostic>;
