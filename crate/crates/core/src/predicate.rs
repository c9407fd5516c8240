//! Boolean row predicates shared by the compiler, the circuit builders, the
//! indexes and the classical executor.

use std::cmp::Ordering;
use std::fmt;

use crate::storage::{Table, Value};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ColumnRef {
    pub table: Option<String>,
    pub column: String,
}

impl ColumnRef {
    pub fn bare(column: &str) -> Self {
        Self {
            table: None,
            column: column.to_string(),
        }
    }

    pub fn qualified(table: &str, column: &str) -> Self {
        Self {
            table: Some(table.to_string()),
            column: column.to_string(),
        }
    }
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.table {
            Some(t) => write!(f, "{t}.{}", self.column),
            None => write!(f, "{}", self.column),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bound {
    pub value: Value,
    pub inclusive: bool,
}

impl Bound {
    pub fn inclusive(value: Value) -> Self {
        Self {
            value,
            inclusive: true,
        }
    }

    pub fn exclusive(value: Value) -> Self {
        Self {
            value,
            inclusive: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    Const(bool),
    Eq {
        column: ColumnRef,
        value: Value,
    },
    /// Missing bounds are unbounded.
    Range {
        column: ColumnRef,
        low: Option<Bound>,
        high: Option<Bound>,
    },
    /// `column LIKE 'prefix%'`.
    PrefixLike {
        column: ColumnRef,
        prefix: String,
    },
    And(Vec<Predicate>),
    Or(Vec<Predicate>),
    Not(Box<Predicate>),
    /// Outcome of the uncorrelated subquery with this handle; resolve with
    /// [`Predicate::resolve_exists`] before evaluation.
    Exists(usize),
}

impl Predicate {
    /// Conjunction with nested `And`s flattened and `true` constants dropped.
    pub fn and(parts: Vec<Predicate>) -> Predicate {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Predicate::And(inner) => out.extend(inner),
                Predicate::Const(true) => {}
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Predicate::Const(true),
            1 => out.pop().unwrap(),
            _ => Predicate::And(out),
        }
    }

    pub fn conjuncts(&self) -> Vec<Predicate> {
        match self {
            Predicate::And(v) => v.iter().flat_map(|p| p.conjuncts()).collect(),
            Predicate::Const(true) => Vec::new(),
            p => vec![p.clone()],
        }
    }

    /// Every column referenced, deduplicated, in first-use order.
    pub fn columns(&self) -> Vec<ColumnRef> {
        let mut out: Vec<ColumnRef> = Vec::new();
        self.visit_columns(&mut |c| {
            if !out.contains(c) {
                out.push(c.clone());
            }
        });
        out
    }

    fn visit_columns(&self, f: &mut dyn FnMut(&ColumnRef)) {
        match self {
            Predicate::Eq { column, .. }
            | Predicate::Range { column, .. }
            | Predicate::PrefixLike { column, .. } => f(column),
            Predicate::And(v) | Predicate::Or(v) => v.iter().for_each(|p| p.visit_columns(f)),
            Predicate::Not(p) => p.visit_columns(f),
            Predicate::Const(_) | Predicate::Exists(_) => {}
        }
    }

    pub fn has_exists(&self) -> bool {
        match self {
            Predicate::Exists(_) => true,
            Predicate::And(v) | Predicate::Or(v) => v.iter().any(Predicate::has_exists),
            Predicate::Not(p) => p.has_exists(),
            _ => false,
        }
    }

    /// Replaces `Exists(i)` by the constant `outcomes[i]`.
    pub fn resolve_exists(&self, outcomes: &[bool]) -> Predicate {
        self.map(&|p| match p {
            Predicate::Exists(i) => {
                Some(Predicate::Const(outcomes.get(*i).copied().unwrap_or(false)))
            }
            _ => None,
        })
    }

    /// Rewrites every column reference.
    pub fn map_columns(&self, f: &dyn Fn(&ColumnRef) -> ColumnRef) -> Predicate {
        self.map(&|p| match p {
            Predicate::Eq { column, value } => Some(Predicate::Eq {
                column: f(column),
                value: value.clone(),
            }),
            Predicate::Range { column, low, high } => Some(Predicate::Range {
                column: f(column),
                low: low.clone(),
                high: high.clone(),
            }),
            Predicate::PrefixLike { column, prefix } => Some(Predicate::PrefixLike {
                column: f(column),
                prefix: prefix.clone(),
            }),
            _ => None,
        })
    }

    fn map(&self, f: &dyn Fn(&Predicate) -> Option<Predicate>) -> Predicate {
        if let Some(p) = f(self) {
            return p;
        }
        match self {
            Predicate::And(v) => Predicate::And(v.iter().map(|p| p.map(f)).collect()),
            Predicate::Or(v) => Predicate::Or(v.iter().map(|p| p.map(f)).collect()),
            Predicate::Not(p) => Predicate::Not(Box::new(p.map(f))),
            p => p.clone(),
        }
    }

    /// Classical truth value; `lookup` supplies the value of a referenced column.
    /// Unresolved `Exists` evaluates to false.
    pub fn eval(&self, lookup: &dyn Fn(&ColumnRef) -> Value) -> bool {
        match self {
            Predicate::Const(b) => *b,
            Predicate::Eq { column, value } => {
                lookup(column).compare(value) == Some(Ordering::Equal)
            }
            Predicate::Range { column, low, high } => {
                let v = lookup(column);
                let lo_ok = low.as_ref().is_none_or(|b| match v.compare(&b.value) {
                    Some(Ordering::Greater) => true,
                    Some(Ordering::Equal) => b.inclusive,
                    _ => false,
                });
                let hi_ok = high.as_ref().is_none_or(|b| match v.compare(&b.value) {
                    Some(Ordering::Less) => true,
                    Some(Ordering::Equal) => b.inclusive,
                    _ => false,
                });
                lo_ok && hi_ok
            }
            Predicate::PrefixLike { column, prefix } => lookup(column)
                .as_str()
                .is_some_and(|s| s.starts_with(prefix.as_str())),
            Predicate::And(v) => v.iter().all(|p| p.eval(lookup)),
            Predicate::Or(v) => v.iter().any(|p| p.eval(lookup)),
            Predicate::Not(p) => !p.eval(lookup),
            Predicate::Exists(_) => false,
        }
    }

    /// Evaluates against one row of `table`, resolving columns by name.
    ///
    /// Panics if a column is missing; callers resolve names during lowering.
    pub fn eval_row(&self, table: &Table, rid: usize) -> bool {
        self.eval(&|c: &ColumnRef| {
            let idx = table
                .column_index(&c.column)
                .expect("predicate column resolved against table");
            table.value(rid, idx)
        })
    }
}

fn fmt_value(v: &Value) -> String {
    match v {
        Value::Text(s) => format!("'{}'", s.replace('\'', "''")),
        v => v.to_string(),
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Const(b) => write!(f, "{}", if *b { "TRUE" } else { "FALSE" }),
            Predicate::Eq { column, value } => write!(f, "{column} = {}", fmt_value(value)),
            Predicate::Range { column, low, high } => match (low, high) {
                (Some(l), Some(h)) if l.inclusive && h.inclusive => {
                    write!(
                        f,
                        "{column} BETWEEN {} AND {}",
                        fmt_value(&l.value),
                        fmt_value(&h.value)
                    )
                }
                _ => {
                    let mut parts = Vec::new();
                    if let Some(l) = low {
                        parts.push(format!(
                            "{column} {} {}",
                            if l.inclusive { ">=" } else { ">" },
                            fmt_value(&l.value)
                        ));
                    }
                    if let Some(h) = high {
                        parts.push(format!(
                            "{column} {} {}",
                            if h.inclusive { "<=" } else { "<" },
                            fmt_value(&h.value)
                        ));
                    }
                    if parts.is_empty() {
                        write!(f, "TRUE")
                    } else if parts.len() == 1 {
                        write!(f, "{}", parts[0])
                    } else {
                        write!(f, "({})", parts.join(" AND "))
                    }
                }
            },
            Predicate::PrefixLike { column, prefix } => {
                write!(f, "{column} LIKE '{}%'", prefix.replace('\'', "''"))
            }
            Predicate::And(v) => write!(
                f,
                "({})",
                v.iter()
                    .map(|p| p.to_string())
                    .collect::<Vec<_>>()
                    .join(" AND ")
            ),
            Predicate::Or(v) => write!(
                f,
                "({})",
                v.iter()
                    .map(|p| p.to_string())
                    .collect::<Vec<_>>()
                    .join(" OR ")
            ),
            Predicate::Not(p) => write!(f, "NOT {p}"),
            Predicate::Exists(i) => write!(f, "EXISTS(#{i})"),
        }
    }
}
