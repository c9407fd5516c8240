//! Classical columnar storage: tables, catalog, statistics, CSV ingestion,
//! binary persistence and synthetic workload generation.

mod catalog;
mod synth;
mod table;

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use catalog::{Catalog, IndexDef};
pub use synth::{generate_synthetic, SelectivitySpec, SyntheticTable, MAX_SELECTIVITY};
pub use table::{basis_encode, control_flags, ColumnData, ColumnDef, ColumnStats, Table};

/// Integer columns wider than this are never compiled into oracles.
pub const MAX_QUANTUM_BITS: u8 = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StorageError {
    #[error("table {0} already exists")]
    DuplicateTable(String),
    #[error("unknown table {0}")]
    UnknownTable(String),
    #[error("unknown column {0}")]
    UnknownColumn(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("value {value} does not fit in {bits} bits")]
    WidthOverflow { value: u64, bits: u32 },
    #[error("infeasible selectivity: {0}")]
    InfeasibleSelectivity(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for StorageError {
    fn from(e: std::io::Error) -> Self {
        StorageError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ColumnType {
    /// Unsigned integer of `bits` bits; `bits == 1` doubles as a boolean flag.
    UInt {
        bits: u8,
    },
    Real,
    Vector {
        dim: usize,
    },
    /// Strings, encoded for circuits through an order-preserving dictionary.
    Text,
}

impl ColumnType {
    pub fn is_flag(&self) -> bool {
        matches!(self, ColumnType::UInt { bits: 1 })
    }
}

impl fmt::Display for ColumnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnType::UInt { bits: 1 } => write!(f, "BOOL"),
            ColumnType::UInt { bits } => write!(f, "UINT({bits})"),
            ColumnType::Real => write!(f, "REAL"),
            ColumnType::Vector { dim } => write!(f, "VECTOR({dim})"),
            ColumnType::Text => write!(f, "TEXT"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    UInt(u64),
    Real(f64),
    Text(String),
    Vector(Vec<f64>),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::UInt(v) => Some(*v as f64),
            Value::Real(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_u64(&self) -> Option<u64> {
        match self {
            Value::UInt(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            Value::Vector(v) => Some(v),
            _ => None,
        }
    }

    /// Ordering between comparable values: numbers with numbers, text with text.
    pub fn compare(&self, other: &Value) -> Option<Ordering> {
        match (self, other) {
            (Value::UInt(a), Value::UInt(b)) => Some(a.cmp(b)),
            (Value::Text(a), Value::Text(b)) => Some(a.cmp(b)),
            (Value::Vector(_), _) | (_, Value::Vector(_)) => None,
            _ => self.as_f64()?.partial_cmp(&other.as_f64()?),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::UInt(v) => write!(f, "{v}"),
            Value::Real(v) => write!(f, "{v}"),
            Value::Text(s) => write!(f, "{s}"),
            Value::Vector(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "[{}]", parts.join(";"))
            }
        }
    }
}
