//! Statement-level facade over the catalog, the compiler pipeline and the executor.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::{Config, ConfigError};
use crate::exec::{execute, ExecError, ResultSet};
use crate::optimizer::{plan, HybridPlan};
use crate::sim::DeviceModel;
use crate::sql::ast::{Literal, Statement};
use crate::sql::{
    apply_rewrites, default_rules, lower_logical, lower_physical, lower_quantum, parse_script,
    parse_sql, SqlError,
};
use crate::storage::{Catalog, ColumnDef, ColumnType, IndexDef, StorageError, Table, Value};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Sql(#[from] SqlError),
    #[error(transparent)]
    Storage(#[from] StorageError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Result of one statement.
#[derive(Debug, Clone)]
pub enum Outcome {
    /// DDL or DML acknowledgement.
    Done(String),
    Rows(ResultSet),
    /// Rendered plan; with ANALYZE, also the executed result and trace.
    Explain {
        plan: String,
        analyzed: Option<ResultSet>,
    },
}

pub struct Engine {
    pub catalog: Catalog,
    config: Config,
    device: DeviceModel,
    /// Directory for relative COPY paths.
    base_dir: PathBuf,
    queries: u64,
}

fn default_value(ty: ColumnType) -> Value {
    match ty {
        ColumnType::UInt { .. } => Value::UInt(0),
        ColumnType::Real => Value::Real(0.0),
        ColumnType::Text => Value::Text(String::new()),
        ColumnType::Vector { dim } => Value::Vector(vec![0.0; dim]),
    }
}

fn literal_value(l: &Literal, ty: ColumnType) -> Value {
    match (l, ty) {
        (Literal::Int(v), ColumnType::Real) => Value::Real(*v as f64),
        (Literal::Int(v), _) if *v >= 0 => Value::UInt(*v as u64),
        (Literal::Int(v), _) => Value::Real(*v as f64),
        (Literal::Real(v), _) => Value::Real(*v),
        (Literal::Str(s), _) => Value::Text(s.clone()),
        (Literal::Bool(b), _) => Value::UInt(u64::from(*b)),
        (Literal::Vector(v), _) => Value::Vector(v.clone()),
    }
}

impl Engine {
    pub fn new(config: Config) -> Result<Self, EngineError> {
        config.validate()?;
        let device = config.resolve_device()?;
        Ok(Self {
            catalog: Catalog::new(),
            config,
            device,
            base_dir: PathBuf::from("."),
            queries: 0,
        })
    }

    pub fn with_catalog(mut self, catalog: Catalog) -> Self {
        self.catalog = catalog;
        self
    }

    pub fn set_base_dir(&mut self, dir: &Path) {
        self.base_dir = dir.to_path_buf();
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn device(&self) -> &DeviceModel {
        &self.device
    }

    /// Compiles a SELECT (or the SELECT inside EXPLAIN) into a hybrid plan.
    pub fn plan_statement(&self, stmt: &Statement) -> Result<HybridPlan, EngineError> {
        let ir = apply_rewrites(&lower_logical(stmt, &self.catalog)?, &default_rules());
        let qir = lower_quantum(&ir, &self.catalog, &self.device);
        let phys = lower_physical(
            &qir,
            &self.catalog,
            &self.config.physical_options(&self.device),
        );
        Ok(plan(&phys, &self.device, &self.config.policy))
    }

    pub fn plan_sql(&self, sql: &str) -> Result<HybridPlan, EngineError> {
        self.plan_statement(&parse_sql(sql)?)
    }

    pub fn explain(&self, sql: &str) -> Result<String, EngineError> {
        Ok(self.plan_sql(sql)?.explain())
    }

    fn run_plan(&mut self, p: &HybridPlan) -> Result<ResultSet, EngineError> {
        self.queries += 1;
        let ctx = self
            .config
            .exec_context(&self.device, self.config.seed.wrapping_add(self.queries));
        Ok(execute(p, &self.catalog, &ctx)?)
    }

    /// Runs one SELECT and returns its rows.
    pub fn query(&mut self, sql: &str) -> Result<ResultSet, EngineError> {
        match self.execute(&parse_sql(sql)?)? {
            Outcome::Rows(r) => Ok(r),
            _ => Err(ExecError::Unsupported("statement returns no rows".into()).into()),
        }
    }

    /// Parses all statements first, then executes them in order, stopping at the first error.
    pub fn run_script(&mut self, text: &str) -> Result<Vec<Outcome>, EngineError> {
        parse_script(text)?
            .iter()
            .map(|s| self.execute(s))
            .collect()
    }

    pub fn execute(&mut self, stmt: &Statement) -> Result<Outcome, EngineError> {
        match stmt {
            Statement::Select(_) => {
                let p = self.plan_statement(stmt)?;
                Ok(Outcome::Rows(self.run_plan(&p)?))
            }
            Statement::Explain {
                analyze,
                stmt: inner,
            } => {
                let p = self.plan_statement(inner)?;
                let analyzed = if *analyze {
                    Some(self.run_plan(&p)?)
                } else {
                    None
                };
                Ok(Outcome::Explain {
                    plan: p.explain(),
                    analyzed,
                })
            }
            Statement::CreateTable { name, columns } => {
                let defs = columns
                    .iter()
                    .map(|(n, ty)| ColumnDef::new(n, *ty))
                    .collect();
                self.catalog.create_table(Table::new(name, defs)?)?;
                Ok(Outcome::Done(format!("CREATE TABLE {name}")))
            }
            Statement::CreateIndex { table, columns } => {
                self.catalog.add_index(IndexDef {
                    table: table.clone(),
                    columns: columns.clone(),
                })?;
                Ok(Outcome::Done(format!("CREATE INDEX ON {table}")))
            }
            Statement::Insert {
                table,
                columns,
                rows,
            } => {
                let t = self.catalog.table_mut(table)?;
                let order: Vec<usize> = match columns {
                    Some(cols) => cols
                        .iter()
                        .map(|c| t.column_index(c))
                        .collect::<Result<_, _>>()?,
                    None => (0..t.columns.len()).collect(),
                };
                let mut values = Vec::with_capacity(rows.len());
                for row in rows {
                    if row.len() != order.len() {
                        return Err(StorageError::SchemaMismatch(format!(
                            "expected {} values, got {}",
                            order.len(),
                            row.len()
                        ))
                        .into());
                    }
                    let mut v: Vec<Value> = t.columns.iter().map(|c| default_value(c.ty)).collect();
                    for (lit, &i) in row.iter().zip(&order) {
                        v[i] = literal_value(lit, t.columns[i].ty);
                    }
                    values.push(v);
                }
                let n = values.len();
                t.insert_rows(values)?;
                Ok(Outcome::Done(format!("INSERT {n}")))
            }
            Statement::Copy { table, path } => {
                let p = Path::new(path);
                let p = if p.is_relative() {
                    self.base_dir.join(p)
                } else {
                    p.to_path_buf()
                };
                let n = self.catalog.table_mut(table)?.ingest_csv(&p)?;
                Ok(Outcome::Done(format!("COPY {n}")))
            }
        }
    }
}
