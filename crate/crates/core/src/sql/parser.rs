use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::SqlError;
use crate::predicate::ColumnRef;
use crate::storage::ColumnType;

const RESERVED: [&str; 33] = [
    "SELECT", "FROM", "WHERE", "AND", "OR", "NOT", "BETWEEN", "LIKE", "EXISTS", "JOIN", "SIMJOIN",
    "ON", "IP", "SAMPLE", "AS", "CREATE", "TABLE", "INDEX", "INSERT", "INTO", "VALUES", "COPY",
    "EXPLAIN", "ANALYZE", "RID", "TRUE", "FALSE", "COUNT", "SUM", "AVG", "MIN", "NULL", "DISTINCT",
];

const UNSUPPORTED: [&str; 16] = [
    "GROUP", "ORDER", "HAVING", "LIMIT", "UNION", "UPDATE", "DELETE", "DROP", "ALTER", "MAX",
    "DISTINCT", "LEFT", "RIGHT", "OUTER", "OFFSET", "NULL",
];

/// Parses a script of `;`-separated statements.
pub fn parse_script(text: &str) -> Result<Vec<Statement>, SqlError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
    };
    let mut out = Vec::new();
    loop {
        while p.eat_sym(";") {}
        if p.peek().tok == Tok::Eof {
            return Ok(out);
        }
        out.push(p.statement()?);
        if !p.eat_sym(";") && p.peek().tok != Tok::Eof {
            return Err(p.error_here("expected ';' between statements"));
        }
    }
}

/// Parses exactly one statement (a trailing `;` is allowed).
pub fn parse_sql(text: &str) -> Result<Statement, SqlError> {
    let mut stmts = parse_script(text)?;
    match stmts.len() {
        1 => Ok(stmts.remove(0)),
        0 => Err(SqlError::syntax(1, 1, "empty input")),
        n => Err(SqlError::syntax(
            1,
            1,
            format!("expected one statement, found {n}"),
        )),
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, msg: impl Into<String>) -> SqlError {
        let t = self.peek();
        SqlError::syntax(t.line, t.col, msg)
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Number(s) => s.clone(),
            Tok::Str(s) => format!("string '{s}'"),
            Tok::Sym(s) => format!("'{s}'"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn unexpected(&self, wanted: &str) -> SqlError {
        let t = self.peek();
        if let Tok::Ident(s) = &t.tok {
            let up = s.to_ascii_uppercase();
            if UNSUPPORTED.contains(&up.as_str()) {
                return SqlError::Unsupported {
                    line: t.line,
                    col: t.col,
                    feature: up,
                };
            }
        }
        self.error_here(format!(
            "expected {wanted}, found {}",
            Self::describe(&t.tok)
        ))
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s.eq_ignore_ascii_case(kw))
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), SqlError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.unexpected(kw))
        }
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if matches!(&self.peek().tok, Tok::Sym(x) if *x == s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), SqlError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{s}'")))
        }
    }

    fn ident(&mut self) -> Result<String, SqlError> {
        match &self.peek().tok {
            Tok::Ident(s) if !RESERVED.contains(&s.to_ascii_uppercase().as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    fn statement(&mut self) -> Result<Statement, SqlError> {
        if self.eat_kw("EXPLAIN") {
            let analyze = self.eat_kw("ANALYZE");
            if !self.is_kw("SELECT") {
                return Err(self.unexpected("SELECT after EXPLAIN"));
            }
            return Ok(Statement::Explain {
                analyze,
                stmt: Box::new(self.statement()?),
            });
        }
        if self.is_kw("SELECT") {
            return Ok(Statement::Select(self.select()?));
        }
        if self.eat_kw("CREATE") {
            if self.eat_kw("TABLE") {
                return self.create_table();
            }
            if self.eat_kw("INDEX") {
                if !self.is_kw("ON") {
                    self.ident()?;
                }
                self.expect_kw("ON")?;
                let table = self.ident()?;
                let columns = self.paren_idents()?;
                return Ok(Statement::CreateIndex { table, columns });
            }
            return Err(self.unexpected("TABLE or INDEX"));
        }
        if self.eat_kw("INSERT") {
            return self.insert();
        }
        if self.eat_kw("COPY") {
            let table = self.ident()?;
            self.expect_kw("FROM")?;
            return match self.bump().tok {
                Tok::Str(path) => Ok(Statement::Copy { table, path }),
                _ => {
                    self.pos -= 1;
                    Err(self.unexpected("file path string"))
                }
            };
        }
        Err(self.unexpected("statement"))
    }

    fn paren_idents(&mut self) -> Result<Vec<String>, SqlError> {
        self.expect_sym("(")?;
        let mut out = vec![self.ident()?];
        while self.eat_sym(",") {
            out.push(self.ident()?);
        }
        self.expect_sym(")")?;
        Ok(out)
    }

    fn create_table(&mut self) -> Result<Statement, SqlError> {
        let name = self.ident()?;
        self.expect_sym("(")?;
        let mut columns = Vec::new();
        loop {
            let col = self.ident()?;
            columns.push((col, self.column_type()?));
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym(")")?;
        Ok(Statement::CreateTable { name, columns })
    }

    fn column_type(&mut self) -> Result<ColumnType, SqlError> {
        let t = self.peek().clone();
        let Tok::Ident(name) = &t.tok else {
            return Err(self.unexpected("column type"));
        };
        let up = name.to_ascii_uppercase();
        self.bump();
        Ok(match up.as_str() {
            "BOOL" | "BOOLEAN" => ColumnType::UInt { bits: 1 },
            "REAL" | "FLOAT" | "DOUBLE" => ColumnType::Real,
            "TEXT" | "VARCHAR" => ColumnType::Text,
            "INT" | "INTEGER" => ColumnType::UInt { bits: 16 },
            "UINT" => {
                let bits = self.paren_usize()?;
                if !(1..=64).contains(&bits) {
                    return Err(SqlError::syntax(
                        t.line,
                        t.col,
                        format!("UINT width {bits} outside 1..=64"),
                    ));
                }
                ColumnType::UInt { bits: bits as u8 }
            }
            "VECTOR" => {
                let dim = self.paren_usize()?;
                if dim == 0 {
                    return Err(SqlError::syntax(
                        t.line,
                        t.col,
                        "VECTOR dimension must be positive",
                    ));
                }
                ColumnType::Vector { dim }
            }
            _ => {
                return Err(SqlError::Unsupported {
                    line: t.line,
                    col: t.col,
                    feature: format!("column type {name}"),
                })
            }
        })
    }

    fn paren_usize(&mut self) -> Result<usize, SqlError> {
        self.expect_sym("(")?;
        let v = self.usize_lit()?;
        self.expect_sym(")")?;
        Ok(v)
    }

    fn usize_lit(&mut self) -> Result<usize, SqlError> {
        match &self.peek().tok {
            Tok::Number(s) => match s.parse::<usize>() {
                Ok(v) => {
                    self.bump();
                    Ok(v)
                }
                Err(_) => {
                    Err(self.error_here(format!("expected a non-negative integer, found {s}")))
                }
            },
            _ => Err(self.unexpected("integer")),
        }
    }

    fn insert(&mut self) -> Result<Statement, SqlError> {
        self.expect_kw("INTO")?;
        let table = self.ident()?;
        let columns = if self.peek().tok == Tok::Sym("(") {
            Some(self.paren_idents()?)
        } else {
            None
        };
        self.expect_kw("VALUES")?;
        let mut rows = Vec::new();
        loop {
            self.expect_sym("(")?;
            let mut row = vec![self.literal()?];
            while self.eat_sym(",") {
                row.push(self.literal()?);
            }
            self.expect_sym(")")?;
            rows.push(row);
            if !self.eat_sym(",") {
                break;
            }
        }
        Ok(Statement::Insert {
            table,
            columns,
            rows,
        })
    }

    fn number(&mut self) -> Result<Literal, SqlError> {
        let neg = self.eat_sym("-");
        let t = self.peek().clone();
        let Tok::Number(s) = &t.tok else {
            return Err(self.unexpected("number"));
        };
        self.bump();
        let is_int = !s.contains(['.', 'e', 'E']);
        if is_int {
            if let Ok(v) = s.parse::<i64>() {
                return Ok(Literal::Int(if neg { -v } else { v }));
            }
        }
        let v: f64 = s
            .parse()
            .map_err(|_| SqlError::syntax(t.line, t.col, format!("malformed number '{s}'")))?;
        Ok(Literal::Real(if neg { -v } else { v }))
    }

    fn literal(&mut self) -> Result<Literal, SqlError> {
        match self.peek().tok.clone() {
            Tok::Str(s) => {
                self.bump();
                Ok(Literal::Str(s))
            }
            Tok::Ident(s) if s.eq_ignore_ascii_case("TRUE") => {
                self.bump();
                Ok(Literal::Bool(true))
            }
            Tok::Ident(s) if s.eq_ignore_ascii_case("FALSE") => {
                self.bump();
                Ok(Literal::Bool(false))
            }
            Tok::Sym("[") => {
                self.bump();
                let mut v = Vec::new();
                if !self.eat_sym("]") {
                    loop {
                        v.push(match self.number()? {
                            Literal::Int(x) => x as f64,
                            Literal::Real(x) => x,
                            _ => unreachable!("number() yields numbers"),
                        });
                        if self.eat_sym("]") {
                            break;
                        }
                        self.expect_sym(",")?;
                    }
                }
                Ok(Literal::Vector(v))
            }
            Tok::Number(_) | Tok::Sym("-") => self.number(),
            _ => Err(self.unexpected("literal")),
        }
    }

    fn column_ref(&mut self) -> Result<ColumnRef, SqlError> {
        let first = self.ident()?;
        if self.eat_sym(".") {
            let col = self.ident()?;
            return Ok(ColumnRef::qualified(&first, &col));
        }
        Ok(ColumnRef::bare(&first))
    }

    fn select(&mut self) -> Result<Select, SqlError> {
        self.expect_kw("SELECT")?;
        let mut items = vec![self.select_item()?];
        while self.eat_sym(",") {
            items.push(self.select_item()?);
        }
        self.expect_kw("FROM")?;
        let from = self.source_clause()?;
        let filter = if self.eat_kw("WHERE") {
            Some(self.cond()?)
        } else {
            None
        };
        let sample = if self.eat_kw("SAMPLE") {
            Some(self.usize_lit()?)
        } else {
            None
        };
        if let Tok::Ident(_) = self.peek().tok {
            return Err(self.unexpected("end of SELECT"));
        }
        Ok(Select {
            items,
            from,
            filter,
            sample,
        })
    }

    fn select_item(&mut self) -> Result<SelectItem, SqlError> {
        if self.eat_sym("*") {
            return Ok(SelectItem::Star);
        }
        if self.eat_kw("RID") {
            return Ok(SelectItem::Rid(None));
        }
        for (kw, func) in [
            ("COUNT", AggFunc::Count),
            ("SUM", AggFunc::Sum),
            ("AVG", AggFunc::Avg),
            ("MIN", AggFunc::Min),
        ] {
            if self.is_kw(kw) && *self.peek_at(1) == Tok::Sym("(") {
                self.bump();
                self.bump();
                let arg = if self.eat_sym("*") {
                    if func != AggFunc::Count {
                        return Err(self.error_here(format!("{kw}(*) is not allowed")));
                    }
                    None
                } else {
                    Some(self.column_ref()?)
                };
                self.expect_sym(")")?;
                return Ok(SelectItem::Agg(AggCall { func, arg }));
            }
        }
        if matches!(self.peek_at(1), Tok::Sym("."))
            && matches!(self.peek_at(2), Tok::Ident(s) if s.eq_ignore_ascii_case("RID"))
        {
            let t = self.ident()?;
            self.bump();
            self.bump();
            return Ok(SelectItem::Rid(Some(t)));
        }
        Ok(SelectItem::Column(self.column_ref()?))
    }

    fn table_ref(&mut self) -> Result<TableRef, SqlError> {
        let name = self.ident()?;
        let bare_alias = |t: &Tok| matches!(t, Tok::Ident(s) if !RESERVED.contains(&s.to_ascii_uppercase().as_str()) && !UNSUPPORTED.contains(&s.to_ascii_uppercase().as_str()));
        let alias = if self.eat_kw("AS") || bare_alias(&self.peek().tok) {
            Some(self.ident()?)
        } else {
            None
        };
        Ok(TableRef { name, alias })
    }

    fn cmp_op(&mut self) -> Result<CmpOp, SqlError> {
        let op = match self.peek().tok {
            Tok::Sym("=") => CmpOp::Eq,
            Tok::Sym("<>") | Tok::Sym("!=") => CmpOp::Ne,
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym(">=") => CmpOp::Ge,
            _ => return Err(self.unexpected("comparison operator")),
        };
        self.bump();
        Ok(op)
    }

    fn source_clause(&mut self) -> Result<FromClause, SqlError> {
        let left = self.table_ref()?;
        if self.eat_sym(",") {
            return Err(self.error_here("use JOIN … ON or SIMJOIN … ON to combine tables"));
        }
        if self.eat_kw("JOIN") {
            let right = self.table_ref()?;
            self.expect_kw("ON")?;
            let l = self.column_ref()?;
            let op = self.cmp_op()?;
            let r = self.column_ref()?;
            return Ok(FromClause::Join {
                left,
                right,
                on: JoinCond {
                    left: l,
                    op,
                    right: r,
                },
            });
        }
        if self.eat_kw("SIMJOIN") {
            let right = self.table_ref()?;
            self.expect_kw("ON")?;
            self.expect_kw("IP")?;
            self.expect_sym("(")?;
            let a = self.column_ref()?;
            self.expect_sym(",")?;
            let b = self.column_ref()?;
            self.expect_sym(")")?;
            self.expect_sym(">")?;
            let threshold = match self.number()? {
                Literal::Int(v) => v as f64,
                Literal::Real(v) => v,
                _ => unreachable!("number() yields numbers"),
            };
            return Ok(FromClause::SimJoin {
                left,
                right,
                a,
                b,
                threshold,
            });
        }
        Ok(FromClause::Single(left))
    }

    fn cond(&mut self) -> Result<Cond, SqlError> {
        let mut parts = vec![self.and_cond()?];
        while self.eat_kw("OR") {
            parts.push(self.and_cond()?);
        }
        Ok(if parts.len() == 1 {
            parts.remove(0)
        } else {
            Cond::Or(parts)
        })
    }

    fn and_cond(&mut self) -> Result<Cond, SqlError> {
        let mut parts = vec![self.not_cond()?];
        while self.eat_kw("AND") {
            parts.push(self.not_cond()?);
        }
        Ok(if parts.len() == 1 {
            parts.remove(0)
        } else {
            Cond::And(parts)
        })
    }

    fn not_cond(&mut self) -> Result<Cond, SqlError> {
        if self.eat_kw("NOT") {
            return Ok(Cond::Not(Box::new(self.not_cond()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Cond, SqlError> {
        if self.eat_sym("(") {
            let c = self.cond()?;
            self.expect_sym(")")?;
            return Ok(c);
        }
        if self.eat_kw("EXISTS") {
            self.expect_sym("(")?;
            let s = self.select()?;
            self.expect_sym(")")?;
            return Ok(Cond::Exists(Box::new(s)));
        }
        let col = self.column_ref()?;
        if self.eat_kw("BETWEEN") {
            let low = self.literal()?;
            self.expect_kw("AND")?;
            let high = self.literal()?;
            return Ok(Cond::Between { col, low, high });
        }
        if self.eat_kw("LIKE") {
            return match self.bump().tok {
                Tok::Str(pattern) => Ok(Cond::Like { col, pattern }),
                _ => {
                    self.pos -= 1;
                    Err(self.unexpected("pattern string"))
                }
            };
        }
        let op = self.cmp_op()?;
        if matches!(self.peek().tok, Tok::Ident(_)) && !self.is_kw("TRUE") && !self.is_kw("FALSE") {
            let t = self.peek().clone();
            return Err(SqlError::Unsupported {
                line: t.line,
                col: t.col,
                feature: "column-to-column comparison in WHERE".into(),
            });
        }
        let value = self.literal()?;
        Ok(Cond::Cmp { col, op, value })
    }
}
