use std::fmt;

use crate::predicate::ColumnRef;
use crate::storage::ColumnType;

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Int(i64),
    Real(f64),
    Str(String),
    Bool(bool),
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "<>",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    /// The operator with its operands swapped: `a op b` iff `b op.flip() a`.
    pub fn flip(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Gt,
            CmpOp::Le => CmpOp::Ge,
            CmpOp::Gt => CmpOp::Lt,
            CmpOp::Ge => CmpOp::Le,
            op => op,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cond {
    Cmp {
        col: ColumnRef,
        op: CmpOp,
        value: Literal,
    },
    Between {
        col: ColumnRef,
        low: Literal,
        high: Literal,
    },
    Like {
        col: ColumnRef,
        pattern: String,
    },
    And(Vec<Cond>),
    Or(Vec<Cond>),
    Not(Box<Cond>),
    Exists(Box<Select>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AggFunc {
    Count,
    Sum,
    Avg,
    Min,
}

impl AggFunc {
    pub fn name(self) -> &'static str {
        match self {
            AggFunc::Count => "COUNT",
            AggFunc::Sum => "SUM",
            AggFunc::Avg => "AVG",
            AggFunc::Min => "MIN",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggCall {
    pub func: AggFunc,
    /// `None` for `COUNT(*)`.
    pub arg: Option<ColumnRef>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SelectItem {
    Star,
    /// Row identifier, optionally qualified.
    Rid(Option<String>),
    Column(ColumnRef),
    Agg(AggCall),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableRef {
    pub name: String,
    pub alias: Option<String>,
}

impl TableRef {
    /// Name columns of this table are qualified with.
    pub fn binding(&self) -> &str {
        self.alias.as_deref().unwrap_or(&self.name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JoinCond {
    pub left: ColumnRef,
    pub op: CmpOp,
    pub right: ColumnRef,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FromClause {
    Single(TableRef),
    Join {
        left: TableRef,
        right: TableRef,
        on: JoinCond,
    },
    /// `left SIMJOIN right ON IP(a, b) > threshold`.
    SimJoin {
        left: TableRef,
        right: TableRef,
        a: ColumnRef,
        b: ColumnRef,
        threshold: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Select {
    pub items: Vec<SelectItem>,
    pub from: FromClause,
    pub filter: Option<Cond>,
    pub sample: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Statement {
    Select(Select),
    CreateTable {
        name: String,
        columns: Vec<(String, ColumnType)>,
    },
    CreateIndex {
        table: String,
        columns: Vec<String>,
    },
    Insert {
        table: String,
        columns: Option<Vec<String>>,
        rows: Vec<Vec<Literal>>,
    },
    /// `COPY t FROM 'file.csv'`.
    Copy {
        table: String,
        path: String,
    },
    Explain {
        analyze: bool,
        stmt: Box<Statement>,
    },
}

fn real(x: f64) -> String {
    format!("{x:?}")
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Int(v) => write!(f, "{v}"),
            Literal::Real(v) => write!(f, "{}", real(*v)),
            Literal::Str(s) => write!(f, "'{}'", s.replace('\'', "''")),
            Literal::Bool(b) => write!(f, "{}", if *b { "TRUE" } else { "FALSE" }),
            Literal::Vector(v) => write!(
                f,
                "[{}]",
                v.iter().map(|x| real(*x)).collect::<Vec<_>>().join(", ")
            ),
        }
    }
}

fn fmt_operand(c: &Cond) -> String {
    match c {
        Cond::And(_) | Cond::Or(_) => format!("({c})"),
        _ => c.to_string(),
    }
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cond::Cmp { col, op, value } => write!(f, "{col} {} {value}", op.symbol()),
            Cond::Between { col, low, high } => write!(f, "{col} BETWEEN {low} AND {high}"),
            Cond::Like { col, pattern } => {
                write!(f, "{col} LIKE {}", Literal::Str(pattern.clone()))
            }
            Cond::And(v) => write!(
                f,
                "{}",
                v.iter().map(fmt_operand).collect::<Vec<_>>().join(" AND ")
            ),
            Cond::Or(v) => write!(
                f,
                "{}",
                v.iter().map(fmt_operand).collect::<Vec<_>>().join(" OR ")
            ),
            Cond::Not(c) => write!(f, "NOT {}", fmt_operand(c)),
            Cond::Exists(s) => write!(f, "EXISTS ({s})"),
        }
    }
}

impl fmt::Display for SelectItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectItem::Star => write!(f, "*"),
            SelectItem::Rid(None) => write!(f, "RID"),
            SelectItem::Rid(Some(t)) => write!(f, "{t}.RID"),
            SelectItem::Column(c) => write!(f, "{c}"),
            SelectItem::Agg(a) => match &a.arg {
                Some(c) => write!(f, "{}({c})", a.func.name()),
                None => write!(f, "{}(*)", a.func.name()),
            },
        }
    }
}

impl fmt::Display for TableRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.alias {
            Some(a) => write!(f, "{} AS {a}", self.name),
            None => write!(f, "{}", self.name),
        }
    }
}

impl fmt::Display for FromClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FromClause::Single(t) => write!(f, "{t}"),
            FromClause::Join { left, right, on } => write!(
                f,
                "{left} JOIN {right} ON {} {} {}",
                on.left,
                on.op.symbol(),
                on.right
            ),
            FromClause::SimJoin {
                left,
                right,
                a,
                b,
                threshold,
            } => {
                write!(
                    f,
                    "{left} SIMJOIN {right} ON IP({a}, {b}) > {}",
                    real(*threshold)
                )
            }
        }
    }
}

impl fmt::Display for Select {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.items.iter().map(ToString::to_string).collect();
        write!(f, "SELECT {} FROM {}", items.join(", "), self.from)?;
        if let Some(c) = &self.filter {
            write!(f, " WHERE {c}")?;
        }
        if let Some(k) = self.sample {
            write!(f, " SAMPLE {k}")?;
        }
        Ok(())
    }
}

fn type_name(ty: &ColumnType) -> String {
    match ty {
        ColumnType::UInt { bits: 1 } => "BOOL".into(),
        ColumnType::UInt { bits } => format!("UINT({bits})"),
        ColumnType::Real => "REAL".into(),
        ColumnType::Text => "TEXT".into(),
        ColumnType::Vector { dim } => format!("VECTOR({dim})"),
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Select(s) => write!(f, "{s}"),
            Statement::CreateTable { name, columns } => {
                let cols: Vec<String> = columns
                    .iter()
                    .map(|(n, t)| format!("{n} {}", type_name(t)))
                    .collect();
                write!(f, "CREATE TABLE {name} ({})", cols.join(", "))
            }
            Statement::CreateIndex { table, columns } => {
                write!(f, "CREATE INDEX ON {table} ({})", columns.join(", "))
            }
            Statement::Insert {
                table,
                columns,
                rows,
            } => {
                write!(f, "INSERT INTO {table}")?;
                if let Some(c) = columns {
                    write!(f, " ({})", c.join(", "))?;
                }
                let rows: Vec<String> = rows
                    .iter()
                    .map(|r| {
                        format!(
                            "({})",
                            r.iter()
                                .map(ToString::to_string)
                                .collect::<Vec<_>>()
                                .join(", ")
                        )
                    })
                    .collect();
                write!(f, " VALUES {}", rows.join(", "))
            }
            Statement::Copy { table, path } => {
                write!(f, "COPY {table} FROM {}", Literal::Str(path.clone()))
            }
            Statement::Explain { analyze, stmt } => {
                write!(
                    f,
                    "EXPLAIN {}{stmt}",
                    if *analyze { "ANALYZE " } else { "" }
                )
            }
        }
    }
}
