//! Hybrid quantum-classical query engine.
//!
//! SQL is parsed and lowered to a logical plan, annotated with quantum
//! algorithms, compiled to simulated circuits and bound per operator to a
//! quantum or classical realization by expected runtime. Quantum results are
//! reconciled against the stored data, so filters, joins and MIN stay exact.

pub mod calibration;
pub mod circuits;
pub mod config;
pub mod engine;
pub mod exec;
pub mod index;
pub mod optimizer;
pub mod predicate;
pub mod sim;
pub mod sql;
pub mod storage;

pub use config::{Config, ConfigError};
pub use engine::{Engine, EngineError, Outcome};
pub use exec::{execute, ExecContext, Quality, Realization, ResultSet, TraceEntry};
pub use optimizer::{HybridPlan, PlanMode, Policy};
pub use predicate::{Bound, ColumnRef, Predicate};
pub use sim::{Circuit, DeviceModel, NoiseModel, DEFAULT_SHOTS};
pub use storage::{Catalog, ColumnDef, ColumnType, Table, Value};
