//! Text format for games and generators for the benchmark families.
//!
//! ```text
//! # comment
//! VARS x1 x2 x3 x4 y
//! CONSTRAINT exactly<1>(x1, x2, x3, x4)
//! PARAMS coin1 coin2 coin3 coin4
//! ATTR d { coin1 -> x1 coin2 -> x2 coin3 -> x3 coin4 -> x4 }
//! EXPERIMENT t1(2) INSTANCES distinct
//!   OUTCOME "<" (d($1) & !y) | (d($2) & y)
//!   OUTCOME "=" !d($1) & !d($2)
//!   OUTCOME ">" (d($1) & y) | (d($2) & !y)
//! ```

mod generate;
mod lexer;
mod parser;
mod print;

use std::fmt;

pub use generate::{ccp_warning, gen_ccp, gen_mastermind, GenError, MastermindVariant};
pub use parser::parse;
pub use print::{to_source, TemplateDisplay};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub line: usize,
    pub column: usize,
}

impl Diagnostic {
    pub fn error(line: usize, column: usize, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            message: message.into(),
            line,
            column,
        }
    }

    pub fn warning(line: usize, column: usize, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            message: message.into(),
            line,
            column,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {}: {}", self.line, self.column, sev, self.message)
    }
}
