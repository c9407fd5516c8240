use std::fmt;

use super::ast::{
    AggCall, AggFunc, CmpOp, Cond, FromClause, Literal, Select, SelectItem, TableRef,
};
use super::SqlError;
use crate::predicate::{Bound, ColumnRef, Predicate};
use crate::storage::{Catalog, ColumnStats, ColumnType, Value};

/// One output column of a plan node.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    /// Table binding (alias or table name); empty for computed columns.
    pub qualifier: String,
    pub name: String,
    pub ty: ColumnType,
    pub stats: ColumnStats,
}

impl Field {
    pub fn column_ref(&self) -> ColumnRef {
        ColumnRef::qualified(&self.qualifier, &self.name)
    }
}

/// Output columns plus the base-table bindings whose RIDs each tuple carries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Schema {
    pub fields: Vec<Field>,
    /// `(binding, table, row count)` per base relation, left to right.
    pub bindings: Vec<(String, String, usize)>,
}

impl Schema {
    pub fn index_of(&self, c: &ColumnRef) -> Option<usize> {
        self.fields
            .iter()
            .position(|f| f.name == c.column && c.table.as_deref().is_none_or(|t| t == f.qualifier))
    }

    pub fn binding_index(&self, binding: &str) -> Option<usize> {
        self.bindings.iter().position(|b| b.0 == binding)
    }

    pub fn field(&self, c: &ColumnRef) -> Option<&Field> {
        self.index_of(c).map(|i| &self.fields[i])
    }

    fn concat(&self, other: &Schema) -> Schema {
        let mut s = self.clone();
        s.fields.extend(other.fields.iter().cloned());
        s.bindings.extend(other.bindings.iter().cloned());
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProjectItem {
    /// RID of the binding at this index of the input schema.
    Rid(usize),
    /// Input field at this index.
    Column(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum LogicalOp {
    Scan {
        table: String,
        binding: String,
    },
    /// Children: the input, then one `Exists` node per `Predicate::Exists(i)` handle.
    Filter {
        predicate: Predicate,
    },
    Project {
        items: Vec<ProjectItem>,
    },
    EquiJoin {
        left: ColumnRef,
        right: ColumnRef,
    },
    NonEquiJoin {
        left: ColumnRef,
        op: CmpOp,
        right: ColumnRef,
    },
    /// Pairs with squared normalized overlap |⟨a|b⟩|² above `threshold`.
    SimilarityJoin {
        left: ColumnRef,
        right: ColumnRef,
        threshold: f64,
    },
    Aggregate {
        calls: Vec<AggCall>,
    },
    /// Whether the child produces any row.
    Exists,
    Sample {
        k: usize,
    },
}

impl LogicalOp {
    pub fn name(&self) -> &'static str {
        match self {
            LogicalOp::Scan { .. } => "Scan",
            LogicalOp::Filter { .. } => "Filter",
            LogicalOp::Project { .. } => "Project",
            LogicalOp::EquiJoin { .. } => "EquiJoin",
            LogicalOp::NonEquiJoin { .. } => "NonEquiJoin",
            LogicalOp::SimilarityJoin { .. } => "SimilarityJoin",
            LogicalOp::Aggregate { .. } => "Aggregate",
            LogicalOp::Exists => "Exists",
            LogicalOp::Sample { .. } => "Sample",
        }
    }
}

impl fmt::Display for LogicalOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogicalOp::Scan { table, binding } if table == binding => write!(f, "Scan({table})"),
            LogicalOp::Scan { table, binding } => write!(f, "Scan({table} AS {binding})"),
            LogicalOp::Filter { predicate } => write!(f, "Filter({predicate})"),
            LogicalOp::Project { items } => write!(f, "Project({} columns)", items.len()),
            LogicalOp::EquiJoin { left, right } => write!(f, "EquiJoin({left} = {right})"),
            LogicalOp::NonEquiJoin { left, op, right } => {
                write!(f, "NonEquiJoin({left} {} {right})", op.symbol())
            }
            LogicalOp::SimilarityJoin {
                left,
                right,
                threshold,
            } => write!(f, "SimilarityJoin(IP({left}, {right}) > {threshold})"),
            LogicalOp::Aggregate { calls } => {
                let c: Vec<String> = calls
                    .iter()
                    .map(|c| {
                        format!(
                            "{}({})",
                            c.func.name(),
                            c.arg.as_ref().map_or("*".to_string(), |a| a.to_string())
                        )
                    })
                    .collect();
                write!(f, "Aggregate({})", c.join(", "))
            }
            LogicalOp::Exists => write!(f, "Exists"),
            LogicalOp::Sample { k } => write!(f, "Sample({k})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogicalNode {
    pub op: LogicalOp,
    pub children: Vec<LogicalNode>,
    pub schema: Schema,
}

impl LogicalNode {
    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(LogicalNode::size).sum::<usize>()
    }

    /// Indented one-node-per-line rendering.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(0, &mut out);
        out
    }

    fn render_into(&self, depth: usize, out: &mut String) {
        out.push_str(&format!("{}{}\n", "  ".repeat(depth), self.op));
        for c in &self.children {
            c.render_into(depth + 1, out);
        }
    }
}

pub(crate) fn literal_value(l: &Literal) -> Value {
    match l {
        Literal::Int(v) if *v >= 0 => Value::UInt(*v as u64),
        Literal::Int(v) => Value::Real(*v as f64),
        Literal::Real(v) => Value::Real(*v),
        Literal::Str(s) => Value::Text(s.clone()),
        Literal::Bool(b) => Value::UInt(u64::from(*b)),
        Literal::Vector(v) => Value::Vector(v.clone()),
    }
}

fn numeric(ty: ColumnType) -> bool {
    matches!(ty, ColumnType::UInt { .. } | ColumnType::Real)
}

fn check_literal(field: &Field, l: &Literal) -> Result<Value, SqlError> {
    let ok = matches!(
        (field.ty, l),
        (
            ColumnType::UInt { .. } | ColumnType::Real,
            Literal::Int(_) | Literal::Real(_) | Literal::Bool(_)
        ) | (ColumnType::Text, Literal::Str(_))
    );
    if !ok {
        return Err(SqlError::TypeMismatch(format!(
            "{}.{} ({}) compared with {l}",
            field.qualifier, field.name, field.ty
        )));
    }
    Ok(literal_value(l))
}

/// Splits `pattern` into an equality or prefix match.
fn like_predicate(column: ColumnRef, pattern: &str) -> Result<Predicate, SqlError> {
    let wild = |s: &str| s.contains(['%', '_']);
    if !wild(pattern) {
        return Ok(Predicate::Eq {
            column,
            value: Value::Text(pattern.to_string()),
        });
    }
    match pattern.strip_suffix('%') {
        Some(prefix) if !wild(prefix) => Ok(Predicate::PrefixLike {
            column,
            prefix: prefix.to_string(),
        }),
        _ => Err(SqlError::UnsupportedFeature(format!(
            "LIKE pattern '{pattern}' (only 'prefix%' is supported)"
        ))),
    }
}

struct Scope<'a> {
    schema: &'a Schema,
    tables: Vec<(String, String)>,
}

impl<'a> Scope<'a> {
    /// Resolves to a binding-qualified reference.
    fn resolve(&self, c: &ColumnRef) -> Result<(ColumnRef, &'a Field), SqlError> {
        let matches: Vec<&Field> = self
            .schema
            .fields
            .iter()
            .filter(|f| {
                f.name.eq_ignore_ascii_case(&c.column)
                    && c.table.as_ref().is_none_or(|t| {
                        *t == f.qualifier
                            || self
                                .tables
                                .iter()
                                .any(|(b, name)| *b == f.qualifier && name == t)
                    })
            })
            .collect();
        match matches.len() {
            0 => Err(SqlError::UnknownColumn(c.to_string())),
            1 => Ok((matches[0].column_ref(), matches[0])),
            _ => Err(SqlError::AmbiguousColumn(c.to_string())),
        }
    }
}

fn scan(catalog: &Catalog, t: &TableRef) -> Result<LogicalNode, SqlError> {
    let table = catalog
        .table(&t.name)
        .map_err(|_| SqlError::UnknownTable(t.name.clone()))?;
    let binding = t.binding().to_string();
    let fields = table
        .columns
        .iter()
        .map(|c| Field {
            qualifier: binding.clone(),
            name: c.name.clone(),
            ty: c.ty,
            stats: c.stats.clone(),
        })
        .collect();
    Ok(LogicalNode {
        op: LogicalOp::Scan {
            table: table.name.clone(),
            binding: binding.clone(),
        },
        children: Vec::new(),
        schema: Schema {
            fields,
            bindings: vec![(binding, table.name.clone(), table.row_count())],
        },
    })
}

fn lower_cond(
    cond: &Cond,
    scope: &Scope,
    catalog: &Catalog,
    subplans: &mut Vec<LogicalNode>,
) -> Result<Predicate, SqlError> {
    Ok(match cond {
        Cond::Cmp { col, op, value } => {
            let (column, field) = scope.resolve(col)?;
            let v = check_literal(field, value)?;
            match op {
                CmpOp::Eq => Predicate::Eq { column, value: v },
                CmpOp::Ne => Predicate::Not(Box::new(Predicate::Eq { column, value: v })),
                CmpOp::Lt => Predicate::Range {
                    column,
                    low: None,
                    high: Some(Bound::exclusive(v)),
                },
                CmpOp::Le => Predicate::Range {
                    column,
                    low: None,
                    high: Some(Bound::inclusive(v)),
                },
                CmpOp::Gt => Predicate::Range {
                    column,
                    low: Some(Bound::exclusive(v)),
                    high: None,
                },
                CmpOp::Ge => Predicate::Range {
                    column,
                    low: Some(Bound::inclusive(v)),
                    high: None,
                },
            }
        }
        Cond::Between { col, low, high } => {
            let (column, field) = scope.resolve(col)?;
            let (lo, hi) = (check_literal(field, low)?, check_literal(field, high)?);
            Predicate::Range {
                column,
                low: Some(Bound::inclusive(lo)),
                high: Some(Bound::inclusive(hi)),
            }
        }
        Cond::Like { col, pattern } => {
            let (column, field) = scope.resolve(col)?;
            if field.ty != ColumnType::Text {
                return Err(SqlError::TypeMismatch(format!(
                    "LIKE on {} column {column}",
                    field.ty
                )));
            }
            like_predicate(column, pattern)?
        }
        Cond::And(v) => Predicate::And(
            v.iter()
                .map(|c| lower_cond(c, scope, catalog, subplans))
                .collect::<Result<_, _>>()?,
        ),
        Cond::Or(v) => Predicate::Or(
            v.iter()
                .map(|c| lower_cond(c, scope, catalog, subplans))
                .collect::<Result<_, _>>()?,
        ),
        Cond::Not(c) => Predicate::Not(Box::new(lower_cond(c, scope, catalog, subplans)?)),
        Cond::Exists(sel) => {
            let sub = lower_select(sel, catalog)?;
            let node = LogicalNode {
                op: LogicalOp::Exists,
                schema: Schema {
                    fields: vec![Field {
                        qualifier: String::new(),
                        name: "exists".into(),
                        ty: ColumnType::UInt { bits: 1 },
                        stats: ColumnStats::default(),
                    }],
                    bindings: Vec::new(),
                },
                children: vec![sub],
            };
            subplans.push(node);
            Predicate::Exists(subplans.len() - 1)
        }
    })
}

/// Name-resolves and type-checks a SELECT into an operator tree.
pub fn lower_select(sel: &Select, catalog: &Catalog) -> Result<LogicalNode, SqlError> {
    let (mut node, tables) = match &sel.from {
        FromClause::Single(t) => (
            scan(catalog, t)?,
            vec![(t.binding().to_string(), t.name.clone())],
        ),
        FromClause::Join { left, right, on } => {
            let (l, r) = (scan(catalog, left)?, scan(catalog, right)?);
            if left.binding() == right.binding() {
                return Err(SqlError::AmbiguousColumn(format!(
                    "table binding {} used twice; add an alias",
                    left.binding()
                )));
            }
            let tables = vec![
                (left.binding().to_string(), left.name.clone()),
                (right.binding().to_string(), right.name.clone()),
            ];
            let ls = Scope {
                schema: &l.schema,
                tables: tables.clone(),
            };
            let rs = Scope {
                schema: &r.schema,
                tables: tables.clone(),
            };
            let (lc, rc, op) = match (ls.resolve(&on.left), rs.resolve(&on.right)) {
                (Ok(a), Ok(b)) => (a, b, on.op),
                _ => match (ls.resolve(&on.right), rs.resolve(&on.left)) {
                    (Ok(a), Ok(b)) => (a, b, on.op.flip()),
                    _ => {
                        let both = Scope {
                            schema: &l.schema.concat(&r.schema),
                            tables: tables.clone(),
                        };
                        both.resolve(&on.left)?;
                        both.resolve(&on.right)?;
                        return Err(SqlError::TypeMismatch(
                            "join condition must compare one column of each table".into(),
                        ));
                    }
                },
            };
            let comparable = (numeric(lc.1.ty) && numeric(rc.1.ty))
                || (lc.1.ty == ColumnType::Text && rc.1.ty == ColumnType::Text);
            if !comparable {
                return Err(SqlError::TypeMismatch(format!(
                    "cannot compare {} ({}) with {} ({})",
                    lc.0, lc.1.ty, rc.0, rc.1.ty
                )));
            }
            let schema = l.schema.concat(&r.schema);
            let op = match op {
                CmpOp::Eq => LogicalOp::EquiJoin {
                    left: lc.0,
                    right: rc.0,
                },
                op => LogicalOp::NonEquiJoin {
                    left: lc.0,
                    op,
                    right: rc.0,
                },
            };
            (
                LogicalNode {
                    op,
                    children: vec![l, r],
                    schema,
                },
                tables,
            )
        }
        FromClause::SimJoin {
            left,
            right,
            a,
            b,
            threshold,
        } => {
            let (l, r) = (scan(catalog, left)?, scan(catalog, right)?);
            if left.binding() == right.binding() {
                return Err(SqlError::AmbiguousColumn(format!(
                    "table binding {} used twice; add an alias",
                    left.binding()
                )));
            }
            let tables = vec![
                (left.binding().to_string(), left.name.clone()),
                (right.binding().to_string(), right.name.clone()),
            ];
            let (ac, bc) = {
                let ls = Scope {
                    schema: &l.schema,
                    tables: tables.clone(),
                };
                let rs = Scope {
                    schema: &r.schema,
                    tables: tables.clone(),
                };
                match (ls.resolve(a), rs.resolve(b)) {
                    (Ok(x), Ok(y)) => (x, y),
                    _ => (ls.resolve(b)?, rs.resolve(a)?),
                }
            };
            match (ac.1.ty, bc.1.ty) {
                (ColumnType::Vector { dim: da }, ColumnType::Vector { dim: db }) if da == db => {}
                (ta, tb) => {
                    return Err(SqlError::TypeMismatch(format!(
                        "IP needs two vectors of equal dimension, got {ta} and {tb}"
                    )))
                }
            }
            let schema = l.schema.concat(&r.schema);
            let op = LogicalOp::SimilarityJoin {
                left: ac.0,
                right: bc.0,
                threshold: *threshold,
            };
            (
                LogicalNode {
                    op,
                    children: vec![l, r],
                    schema,
                },
                tables,
            )
        }
    };

    if let Some(cond) = &sel.filter {
        let mut subplans = Vec::new();
        let predicate = {
            let scope = Scope {
                schema: &node.schema,
                tables: tables.clone(),
            };
            lower_cond(cond, &scope, catalog, &mut subplans)?
        };
        let schema = node.schema.clone();
        let mut children = vec![node];
        children.extend(subplans);
        node = LogicalNode {
            op: LogicalOp::Filter { predicate },
            children,
            schema,
        };
    }
    if let Some(k) = sel.sample {
        let schema = node.schema.clone();
        node = LogicalNode {
            op: LogicalOp::Sample { k },
            children: vec![node],
            schema,
        };
    }

    let aggs: Vec<&AggCall> = sel
        .items
        .iter()
        .filter_map(|i| {
            if let SelectItem::Agg(a) = i {
                Some(a)
            } else {
                None
            }
        })
        .collect();
    let scope = Scope {
        schema: &node.schema,
        tables: tables.clone(),
    };
    if !aggs.is_empty() {
        if aggs.len() != sel.items.len() {
            return Err(SqlError::UnsupportedFeature(
                "aggregates mixed with plain columns (no GROUP BY)".into(),
            ));
        }
        let mut calls = Vec::new();
        let mut fields = Vec::new();
        for a in aggs {
            let (arg, ty) = match &a.arg {
                None => (None, ColumnType::UInt { bits: 64 }),
                Some(c) => {
                    let (r, f) = scope.resolve(c)?;
                    if a.func != AggFunc::Count && !numeric(f.ty) {
                        return Err(SqlError::TypeMismatch(format!(
                            "{} over {} column {r}",
                            a.func.name(),
                            f.ty
                        )));
                    }
                    let ty = match a.func {
                        AggFunc::Count => ColumnType::UInt { bits: 64 },
                        AggFunc::Min => f.ty,
                        AggFunc::Sum | AggFunc::Avg => ColumnType::Real,
                    };
                    (Some(r), ty)
                }
            };
            let label = format!(
                "{}({})",
                a.func.name(),
                arg.as_ref()
                    .map_or("*".to_string(), |c: &ColumnRef| c.column.clone())
            );
            fields.push(Field {
                qualifier: String::new(),
                name: label,
                ty,
                stats: ColumnStats::default(),
            });
            calls.push(AggCall { func: a.func, arg });
        }
        let schema = Schema {
            fields,
            bindings: Vec::new(),
        };
        return Ok(LogicalNode {
            op: LogicalOp::Aggregate { calls },
            children: vec![node],
            schema,
        });
    }

    let mut items = Vec::new();
    let mut fields = Vec::new();
    for item in &sel.items {
        match item {
            SelectItem::Star => {
                for (i, f) in node.schema.fields.iter().enumerate() {
                    items.push(ProjectItem::Column(i));
                    fields.push(f.clone());
                }
            }
            SelectItem::Rid(q) => {
                let idx = match q {
                    None if node.schema.bindings.len() == 1 => 0,
                    None => return Err(SqlError::AmbiguousColumn("RID".into())),
                    Some(t) => node
                        .schema
                        .bindings
                        .iter()
                        .position(|(b, name, _)| b == t || name == t)
                        .ok_or_else(|| SqlError::UnknownTable(t.clone()))?,
                };
                items.push(ProjectItem::Rid(idx));
                fields.push(Field {
                    qualifier: node.schema.bindings[idx].0.clone(),
                    name: "RID".into(),
                    ty: ColumnType::UInt { bits: 64 },
                    stats: ColumnStats::default(),
                });
            }
            SelectItem::Column(c) => {
                let (r, f) = scope.resolve(c)?;
                items.push(ProjectItem::Column(
                    node.schema.index_of(&r).expect("resolved in scope"),
                ));
                fields.push(f.clone());
            }
            SelectItem::Agg(_) => unreachable!("handled above"),
        }
    }
    let schema = Schema {
        fields,
        bindings: node.schema.bindings.clone(),
    };
    Ok(LogicalNode {
        op: LogicalOp::Project { items },
        children: vec![node],
        schema,
    })
}

/// Lowers a SELECT statement (or the SELECT inside EXPLAIN).
pub fn lower_logical(stmt: &super::Statement, catalog: &Catalog) -> Result<LogicalNode, SqlError> {
    match stmt {
        super::Statement::Select(s) => lower_select(s, catalog),
        super::Statement::Explain { stmt, .. } => lower_logical(stmt, catalog),
        other => Err(SqlError::UnsupportedFeature(format!(
            "no query plan for: {other}"
        ))),
    }
}
