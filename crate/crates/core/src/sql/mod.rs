//! SQL subset: lexer, parser, and lowering through the logical, quantum-annotated
//! and physical plan tiers.

pub mod ast;
mod lexer;
pub mod logical;
mod parser;
pub mod physical;
pub mod quantum;
pub mod rewrite;

use thiserror::Error;

pub use ast::Statement;
pub use logical::{lower_logical, Field, LogicalNode, LogicalOp, ProjectItem, Schema};
pub use parser::{parse_script, parse_sql};
pub use physical::{lower_physical, PhysicalNode, PhysicalOptions, QuantumArtifact};
pub use quantum::{lower_quantum, OpParams, QuantumAnnotation, QuantumNode};
pub use rewrite::{apply_rewrites, default_rules, RewriteRule};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SqlError {
    #[error("syntax error at line {line}, column {col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("unsupported feature at line {line}, column {col}: {feature}")]
    Unsupported {
        line: usize,
        col: usize,
        feature: String,
    },
    #[error("unsupported feature: {0}")]
    UnsupportedFeature(String),
    #[error("unknown table {0}")]
    UnknownTable(String),
    #[error("unknown column {0}")]
    UnknownColumn(String),
    #[error("ambiguous column {0}")]
    AmbiguousColumn(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
}

impl SqlError {
    pub(crate) fn syntax(line: usize, col: usize, message: impl Into<String>) -> Self {
        SqlError::Syntax {
            line,
            col,
            message: message.into(),
        }
    }

    /// Source position, when the error came from the parser.
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            SqlError::Syntax { line, col, .. } | SqlError::Unsupported { line, col, .. } => {
                Some((*line, *col))
            }
            _ => None,
        }
    }
}
