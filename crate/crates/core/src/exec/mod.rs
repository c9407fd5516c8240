//! Plan execution: classical operators, quantum realizations with
//! reconciliation, runtime adaptation and per-node tracing.

mod quantum;

use std::collections::HashMap;
use std::fmt;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::index::{index_ranges, MultiIndex, Strategy};
use crate::optimizer::{AdaptCaps, AdaptationAction, Binding, HybridPlan, PlanNode};
use crate::predicate::{ColumnRef, Predicate};
use crate::sim::{DeviceModel, NoiseModel, DEFAULT_SHOTS};
use crate::sql::ast::{AggCall, AggFunc, CmpOp};
use crate::sql::logical::{LogicalOp, ProjectItem, Schema};
use crate::storage::{Catalog, StorageError, Table, Value};

pub use quantum::{reconcile, QuantumRun};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExecError {
    #[error(transparent)]
    Storage(#[from] StorageError),
    #[error("cannot execute: {0}")]
    Unsupported(String),
}

/// Runtime settings for one query.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecContext {
    pub device: DeviceModel,
    pub seed: u64,
    /// Sample with the device's stochastic noise.
    pub noisy: bool,
    pub shots: usize,
    /// Phase register width for COUNT/SUM/AVG.
    pub phase_bits: usize,
    /// Live queue delay used to bind deferred nodes.
    pub queue_delay_ns: f64,
    /// Wall-clock budget for the whole query; once spent, remaining quantum nodes fall back.
    pub latency_budget_ns: Option<f64>,
    /// Strategy threshold constant for secondary-index filters.
    pub index_c: f64,
    pub adapt: AdaptCaps,
}

impl Default for ExecContext {
    fn default() -> Self {
        Self {
            device: DeviceModel::default(),
            seed: 0,
            noisy: false,
            shots: DEFAULT_SHOTS,
            phase_bits: 6,
            queue_delay_ns: 0.0,
            latency_budget_ns: None,
            index_c: 2.0,
            adapt: AdaptCaps::default(),
        }
    }
}

impl ExecContext {
    pub(crate) fn noise(&self, seed: u64) -> NoiseModel {
        if self.noisy {
            NoiseModel::from_device(&self.device, seed)
        } else {
            NoiseModel::noiseless(seed)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quality {
    Exact,
    /// Additive error bound on each approximate output.
    Approximate {
        bound: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Realization {
    Classical,
    Quantum,
    /// Quantum attempt abandoned; the classical realization produced the result.
    Fallback,
    /// Evaluated inside the parent's quantum realization.
    Absorbed,
}

impl fmt::Display for Realization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Realization::Classical => "classical",
            Realization::Quantum => "quantum",
            Realization::Fallback => "fallback",
            Realization::Absorbed => "absorbed",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub depth: usize,
    pub node: String,
    pub realization: Realization,
    pub shots: usize,
    pub rounds: usize,
    pub adaptations: Vec<AdaptationAction>,
    /// Modeled device time of the sampling rounds.
    pub device_ns: f64,
    pub rows_out: usize,
    pub note: Option<String>,
}

impl fmt::Display for TraceEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{} [{}] rows={}",
            "  ".repeat(self.depth),
            self.node,
            self.realization,
            self.rows_out
        )?;
        if self.realization != Realization::Classical && self.realization != Realization::Absorbed {
            write!(
                f,
                " shots={} rounds={} device={:.3e}ns",
                self.shots, self.rounds, self.device_ns
            )?;
        }
        if !self.adaptations.is_empty() {
            write!(f, " adaptations={:?}", self.adaptations)?;
        }
        if let Some(n) = &self.note {
            write!(f, " ({n})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultSet {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub quality: Quality,
    /// One entry per executed plan node, in execution order.
    pub trace: Vec<TraceEntry>,
}

impl ResultSet {
    pub fn trace_text(&self) -> String {
        self.trace.iter().map(|t| format!("{t}\n")).collect()
    }
}

#[derive(Debug, Clone)]
enum Data {
    /// One RID per schema binding.
    Tuples(Vec<Vec<usize>>),
    Rows(Vec<Vec<Value>>),
    Flag(bool),
}

impl Data {
    fn len(&self) -> usize {
        match self {
            Data::Tuples(t) => t.len(),
            Data::Rows(r) => r.len(),
            Data::Flag(b) => usize::from(*b),
        }
    }
}

/// Column accessor for tuples of one schema.
struct Resolver<'a> {
    schema: &'a Schema,
    cols: Vec<(usize, &'a Table, usize)>,
}

impl<'a> Resolver<'a> {
    fn new(schema: &'a Schema, catalog: &'a Catalog) -> Result<Self, ExecError> {
        let mut cols = Vec::with_capacity(schema.fields.len());
        for f in &schema.fields {
            let b = schema
                .binding_index(&f.qualifier)
                .ok_or_else(|| ExecError::Unsupported(format!("computed column {}", f.name)))?;
            let table = catalog.table(&schema.bindings[b].1)?;
            cols.push((b, table, table.column_index(&f.name)?));
        }
        Ok(Self { schema, cols })
    }

    fn field(&self, i: usize, tuple: &[usize]) -> Value {
        let (b, t, c) = self.cols[i];
        t.value(tuple[b], c)
    }

    fn get(&self, c: &ColumnRef, tuple: &[usize]) -> Value {
        let i = self
            .schema
            .index_of(c)
            .expect("columns resolved during lowering");
        self.field(i, tuple)
    }

    fn eval(&self, p: &Predicate, tuple: &[usize]) -> bool {
        p.eval(&|c: &ColumnRef| self.get(c, tuple))
    }
}

/// Rows of `table` satisfying `pred`, by full scan.
pub fn classical_filter(table: &Table, pred: &Predicate) -> Vec<usize> {
    (0..table.row_count())
        .filter(|&r| pred.eval_row(table, r))
        .collect()
}

fn cmp_holds(op: CmpOp, a: &Value, b: &Value) -> bool {
    use std::cmp::Ordering::*;
    match (op, a.compare(b)) {
        (_, None) => false,
        (CmpOp::Eq, Some(o)) => o == Equal,
        (CmpOp::Ne, Some(o)) => o != Equal,
        (CmpOp::Lt, Some(o)) => o == Less,
        (CmpOp::Le, Some(o)) => o != Greater,
        (CmpOp::Gt, Some(o)) => o == Greater,
        (CmpOp::Ge, Some(o)) => o != Less,
    }
}

/// Index pairs `(i, j)` with `left[i] op right[j]`, by nested loops.
pub fn classical_join(left: &[Value], right: &[Value], op: CmpOp) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, a) in left.iter().enumerate() {
        for (j, b) in right.iter().enumerate() {
            if cmp_holds(op, a, b) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Squared overlap of the normalized vectors; 0 when either is zero.
pub fn normalized_overlap(x: &[f64], y: &[f64]) -> f64 {
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let (nx, ny): (f64, f64) = (x.iter().map(|a| a * a).sum(), y.iter().map(|b| b * b).sum());
    if nx == 0.0 || ny == 0.0 {
        0.0
    } else {
        dot * dot / (nx * ny)
    }
}

/// Exact aggregate over `values`. SUM and AVG return reals; MIN of nothing and AVG of nothing are `None`.
pub fn classical_aggregate(func: AggFunc, values: &[Value]) -> Option<Value> {
    let nums = || values.iter().filter_map(Value::as_f64);
    match func {
        AggFunc::Count => Some(Value::UInt(values.len() as u64)),
        AggFunc::Sum => Some(Value::Real(nums().sum())),
        AggFunc::Avg => {
            (!values.is_empty()).then(|| Value::Real(nums().sum::<f64>() / values.len() as f64))
        }
        AggFunc::Min => values
            .iter()
            .min_by(|a, b| a.compare(b).unwrap_or(std::cmp::Ordering::Equal))
            .cloned(),
    }
}

/// `(table, binding, predicate)` when the node reads one base table, optionally filtered.
fn plan_source(node: &PlanNode) -> Option<(String, Predicate)> {
    match &node.op {
        LogicalOp::Scan { table, .. } => Some((table.clone(), Predicate::Const(true))),
        LogicalOp::Filter { predicate } if node.children.len() == 1 => match &node.children[0].op {
            LogicalOp::Scan { table, .. } => Some((table.clone(), predicate.clone())),
            _ => None,
        },
        _ => None,
    }
}

struct Executor<'a> {
    catalog: &'a Catalog,
    ctx: &'a ExecContext,
    start: Instant,
    trace: Vec<TraceEntry>,
    quality: Quality,
    node_seq: u64,
    indexes: HashMap<String, Option<MultiIndex>>,
}

impl<'a> Executor<'a> {
    fn elapsed_ns(&self) -> f64 {
        self.start.elapsed().as_nanos() as f64
    }

    fn budget_spent(&self) -> bool {
        self.ctx
            .latency_budget_ns
            .is_some_and(|b| self.elapsed_ns() > b)
    }

    fn next_seed(&mut self) -> u64 {
        self.node_seq += 1;
        self.ctx.seed ^ self.node_seq.wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }

    fn mark_approximate(&mut self, bound: f64) {
        self.quality = match self.quality {
            Quality::Exact => Quality::Approximate { bound },
            Quality::Approximate { bound: b } => Quality::Approximate {
                bound: b.max(bound),
            },
        };
    }

    fn push_trace(&mut self, depth: usize, node: &PlanNode) -> usize {
        self.trace.push(TraceEntry {
            depth,
            node: node.op.to_string(),
            realization: Realization::Classical,
            shots: 0,
            rounds: 0,
            adaptations: Vec::new(),
            device_ns: 0.0,
            rows_out: 0,
            note: None,
        });
        self.trace.len() - 1
    }

    fn absorb(&mut self, node: &PlanNode, depth: usize) {
        let i = self.push_trace(depth, node);
        self.trace[i].realization = Realization::Absorbed;
        for c in &node.children {
            self.absorb(c, depth + 1);
        }
    }

    fn record(&mut self, slot: usize, run: &QuantumRun) {
        let t = &mut self.trace[slot];
        t.realization = if run.fell_back {
            Realization::Fallback
        } else {
            Realization::Quantum
        };
        t.shots += run.shots;
        t.rounds += run.rounds;
        t.adaptations.extend(run.adaptations.iter().copied());
        t.device_ns += run.device_ns;
        if run.note.is_some() {
            t.note = run.note.clone();
        }
    }

    /// Quantum binding after deferred resolution and budget checks.
    fn use_quantum(&self, node: &PlanNode) -> bool {
        let bound = match node.binding {
            Binding::Quantum => true,
            Binding::Classical => false,
            Binding::Deferred => node
                .quantum_expected_ns
                .is_some_and(|e| e + self.ctx.queue_delay_ns < node.classical_ns),
        };
        bound && node.artifact.is_some()
    }

    fn run(&mut self, node: &PlanNode, depth: usize) -> Result<Data, ExecError> {
        let slot = self.push_trace(depth, node);
        let quantum = self.use_quantum(node);
        if quantum && self.budget_spent() {
            self.trace[slot].realization = Realization::Fallback;
            self.trace[slot]
                .adaptations
                .push(AdaptationAction::Fallback);
            self.trace[slot].note = Some("latency budget spent".into());
        }
        let quantum = quantum && !self.budget_spent();
        let out = match &node.op {
            LogicalOp::Scan { .. } => {
                Data::Tuples((0..node.schema.bindings[0].2).map(|r| vec![r]).collect())
            }
            LogicalOp::Filter { predicate } => {
                self.filter(node, predicate, quantum, slot, depth)?
            }
            LogicalOp::Project { items } => {
                let Data::Tuples(tuples) = self.run(&node.children[0], depth + 1)? else {
                    return Err(ExecError::Unsupported(
                        "projection over non-tuple input".into(),
                    ));
                };
                let input = &node.children[0].schema;
                let res = Resolver::new(input, self.catalog)?;
                let rows = tuples
                    .iter()
                    .map(|t| {
                        items
                            .iter()
                            .map(|it| match it {
                                ProjectItem::Rid(b) => Value::UInt(t[*b] as u64),
                                ProjectItem::Column(i) => res.field(*i, t),
                            })
                            .collect()
                    })
                    .collect();
                Data::Rows(rows)
            }
            LogicalOp::EquiJoin { left, right } => {
                self.join(node, left, CmpOp::Eq, right, quantum, slot, depth)?
            }
            LogicalOp::NonEquiJoin { left, op, right } => {
                self.join(node, left, *op, right, quantum, slot, depth)?
            }
            LogicalOp::SimilarityJoin {
                left,
                right,
                threshold,
            } => self.similarity_join(node, left, right, *threshold, quantum, slot, depth)?,
            LogicalOp::Aggregate { calls } => self.aggregate(node, calls, quantum, slot, depth)?,
            LogicalOp::Exists => self.exists(node, quantum, slot, depth)?,
            LogicalOp::Sample { k } => self.sample(node, *k, quantum, slot, depth)?,
        };
        self.trace[slot].rows_out = out.len();
        Ok(out)
    }

    fn exists_outcomes(&mut self, node: &PlanNode, depth: usize) -> Result<Vec<bool>, ExecError> {
        node.children[1..]
            .iter()
            .map(|c| match self.run(c, depth + 1)? {
                Data::Flag(b) => Ok(b),
                _ => Err(ExecError::Unsupported(
                    "EXISTS subplan without a flag".into(),
                )),
            })
            .collect()
    }

    fn index_for(&mut self, table: &Table) -> Option<&MultiIndex> {
        let cat = self.catalog;
        let c = self.ctx.index_c;
        self.indexes
            .entry(table.name.clone())
            .or_insert_with(|| {
                let def = cat.indexes.iter().find(|d| d.table == table.name)?;
                MultiIndex::build(table, &def.columns, 16, 8, c).ok()
            })
            .as_ref()
    }

    /// Filter of a base table through a secondary index when one covers the predicate.
    fn indexed_filter(&mut self, table: &Table, pred: &Predicate) -> Option<(Vec<usize>, String)> {
        let (ranges, disjunctive) = index_ranges(pred)?;
        let idx = self.index_for(table)?;
        let out = if disjunctive {
            idx.query_disjunctive(&ranges)
        } else {
            idx.query_conjunctive(&ranges)
        }
        .ok()?;
        let note = match &out.decision {
            Some(d) if d.chosen == Strategy::ClassicalPostFilter => {
                format!("index probe k_s={} then post-filter", d.k_s)
            }
            Some(_) => "index kd-tree search".to_string(),
            None => "index union of probes".to_string(),
        };
        let rids = out
            .rids
            .into_iter()
            .filter(|&r| pred.eval_row(table, r))
            .collect();
        Some((rids, note))
    }

    fn filter(
        &mut self,
        node: &PlanNode,
        predicate: &Predicate,
        quantum: bool,
        slot: usize,
        depth: usize,
    ) -> Result<Data, ExecError> {
        let outcomes = self.exists_outcomes(node, depth)?;
        let pred = predicate.resolve_exists(&outcomes);
        let input = &node.children[0];
        if let LogicalOp::Scan { table, .. } = &input.op {
            let table = self.catalog.table(table)?;
            if quantum {
                self.absorb(input, depth + 1);
                let seed = self.next_seed();
                let run = quantum::collect(table, &pred, self.ctx, node, seed, self.start);
                self.record(slot, &run);
                return Ok(Data::Tuples(
                    run.rids.into_iter().map(|r| vec![r]).collect(),
                ));
            }
            let tslot = self.push_trace(depth + 1, input);
            self.trace[tslot].rows_out = table.row_count();
            if let Some((rids, note)) = self.indexed_filter(table, &pred) {
                self.trace[slot].note = Some(note);
                return Ok(Data::Tuples(rids.into_iter().map(|r| vec![r]).collect()));
            }
            return Ok(Data::Tuples(
                classical_filter(table, &pred)
                    .into_iter()
                    .map(|r| vec![r])
                    .collect(),
            ));
        }
        let Data::Tuples(tuples) = self.run(input, depth + 1)? else {
            return Err(ExecError::Unsupported("filter over non-tuple input".into()));
        };
        let res = Resolver::new(&input.schema, self.catalog)?;
        Ok(Data::Tuples(
            tuples.into_iter().filter(|t| res.eval(&pred, t)).collect(),
        ))
    }

    fn tuples(&mut self, node: &PlanNode, depth: usize) -> Result<Vec<Vec<usize>>, ExecError> {
        match self.run(node, depth)? {
            Data::Tuples(t) => Ok(t),
            _ => Err(ExecError::Unsupported(format!(
                "{} does not produce tuples",
                node.op
            ))),
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn join(
        &mut self,
        node: &PlanNode,
        left: &ColumnRef,
        op: CmpOp,
        right: &ColumnRef,
        quantum: bool,
        slot: usize,
        depth: usize,
    ) -> Result<Data, ExecError> {
        let outer = self.tuples(&node.children[0], depth + 1)?;
        let lres = Resolver::new(&node.children[0].schema, self.catalog)?;
        let keys: Vec<Value> = outer.iter().map(|t| lres.get(left, t)).collect();
        let inner_node = &node.children[1];
        if quantum {
            if let Some((tname, pred)) = plan_source(inner_node) {
                self.absorb(inner_node, depth + 1);
                let table = self.catalog.table(&tname)?;
                let seed = self.next_seed();
                let (pairs, run) = quantum::probe_join(
                    table,
                    &pred,
                    &right.column,
                    op,
                    &keys,
                    self.ctx,
                    node,
                    seed,
                    self.start,
                );
                self.record(slot, &run);
                return Ok(Data::Tuples(
                    pairs
                        .into_iter()
                        .map(|(i, r)| outer[i].iter().copied().chain(std::iter::once(r)).collect())
                        .collect(),
                ));
            }
        }
        let inner = self.tuples(inner_node, depth + 1)?;
        let rres = Resolver::new(&inner_node.schema, self.catalog)?;
        let rkeys: Vec<Value> = inner.iter().map(|t| rres.get(right, t)).collect();
        Ok(Data::Tuples(
            classical_join(&keys, &rkeys, op)
                .into_iter()
                .map(|(i, j)| outer[i].iter().chain(&inner[j]).copied().collect())
                .collect(),
        ))
    }

    #[allow(clippy::too_many_arguments)]
    fn similarity_join(
        &mut self,
        node: &PlanNode,
        left: &ColumnRef,
        right: &ColumnRef,
        threshold: f64,
        quantum: bool,
        slot: usize,
        depth: usize,
    ) -> Result<Data, ExecError> {
        let lt = self.tuples(&node.children[0], depth + 1)?;
        let rt = self.tuples(&node.children[1], depth + 1)?;
        let lres = Resolver::new(&node.children[0].schema, self.catalog)?;
        let rres = Resolver::new(&node.children[1].schema, self.catalog)?;
        let vec_of = |v: Value| v.as_vector().map(<[f64]>::to_vec).unwrap_or_default();
        let xs: Vec<Vec<f64>> = lt.iter().map(|t| vec_of(lres.get(left, t))).collect();
        let ys: Vec<Vec<f64>> = rt.iter().map(|t| vec_of(rres.get(right, t))).collect();
        let pairs = if quantum {
            let seed = self.next_seed();
            let (pairs, run, bound) =
                quantum::swap_join(&xs, &ys, threshold, self.ctx, node, seed, self.start);
            self.record(slot, &run);
            if !run.fell_back {
                self.mark_approximate(bound);
            }
            pairs
        } else {
            let mut out = Vec::new();
            for (i, x) in xs.iter().enumerate() {
                for (j, y) in ys.iter().enumerate() {
                    if normalized_overlap(x, y) > threshold {
                        out.push((i, j));
                    }
                }
            }
            out
        };
        Ok(Data::Tuples(
            pairs
                .into_iter()
                .map(|(i, j)| lt[i].iter().chain(&rt[j]).copied().collect())
                .collect(),
        ))
    }

    fn aggregate(
        &mut self,
        node: &PlanNode,
        calls: &[AggCall],
        quantum: bool,
        slot: usize,
        depth: usize,
    ) -> Result<Data, ExecError> {
        let input = &node.children[0];
        if quantum && calls.len() == 1 {
            if let Some((tname, pred)) = plan_source(input) {
                let outcomes = match &input.op {
                    LogicalOp::Filter { .. } => self.exists_outcomes(input, depth + 1)?,
                    _ => Vec::new(),
                };
                let pred = pred.resolve_exists(&outcomes);
                self.absorb(input, depth + 1);
                let table = self.catalog.table(&tname)?;
                let seed = self.next_seed();
                let (value, bound, run) =
                    quantum::aggregate(table, &pred, &calls[0], self.ctx, node, seed, self.start);
                self.record(slot, &run);
                if let Some(b) = bound {
                    self.mark_approximate(b);
                }
                return Ok(Data::Rows(vec![vec![value]]));
            }
        }
        let tuples = self.tuples(input, depth + 1)?;
        let res = Resolver::new(&input.schema, self.catalog)?;
        let row = calls
            .iter()
            .map(|c| {
                let values: Vec<Value> = match &c.arg {
                    None => tuples.iter().map(|_| Value::UInt(1)).collect(),
                    Some(a) => tuples.iter().map(|t| res.get(a, t)).collect(),
                };
                classical_aggregate(c.func, &values).unwrap_or(Value::Real(f64::NAN))
            })
            .collect();
        Ok(Data::Rows(vec![row]))
    }

    fn exists(
        &mut self,
        node: &PlanNode,
        quantum: bool,
        slot: usize,
        depth: usize,
    ) -> Result<Data, ExecError> {
        let child = &node.children[0];
        let source = match &child.op {
            LogicalOp::Project { .. } => &child.children[0],
            _ => child,
        };
        if quantum {
            if let Some((tname, pred)) = plan_source(source) {
                if !pred.has_exists() {
                    self.absorb(child, depth + 1);
                    let table = self.catalog.table(&tname)?;
                    let seed = self.next_seed();
                    let (flag, run) =
                        quantum::exists(table, &pred, self.ctx, node, seed, self.start);
                    self.record(slot, &run);
                    return Ok(Data::Flag(flag));
                }
            }
        }
        Ok(Data::Flag(self.run(child, depth + 1)?.len() > 0))
    }

    fn sample(
        &mut self,
        node: &PlanNode,
        k: usize,
        quantum: bool,
        slot: usize,
        depth: usize,
    ) -> Result<Data, ExecError> {
        let input = &node.children[0];
        if quantum {
            if let Some((tname, pred)) = plan_source(input) {
                if !pred.has_exists() {
                    self.absorb(input, depth + 1);
                    let table = self.catalog.table(&tname)?;
                    let seed = self.next_seed();
                    let (rids, run) =
                        quantum::sample(table, &pred, k, self.ctx, node, seed, self.start);
                    self.record(slot, &run);
                    return Ok(Data::Tuples(rids.into_iter().map(|r| vec![r]).collect()));
                }
            }
        }
        let mut tuples = self.tuples(input, depth + 1)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.next_seed());
        tuples.shuffle(&mut rng);
        tuples.truncate(k);
        tuples.sort();
        Ok(Data::Tuples(tuples))
    }
}

/// Executes `plan` bottom-up. Quantum nodes reconcile their results
/// classically and fall back to their classical realization on failure.
pub fn execute(
    plan: &HybridPlan,
    catalog: &Catalog,
    ctx: &ExecContext,
) -> Result<ResultSet, ExecError> {
    let mut ex = Executor {
        catalog,
        ctx,
        start: Instant::now(),
        trace: Vec::new(),
        quality: Quality::Exact,
        node_seq: 0,
        indexes: HashMap::new(),
    };
    let data = ex.run(&plan.root, 0)?;
    let schema = &plan.root.schema;
    let columns: Vec<String> = schema
        .fields
        .iter()
        .map(|f| {
            if f.qualifier.is_empty() || schema.bindings.len() < 2 {
                f.name.clone()
            } else {
                format!("{}.{}", f.qualifier, f.name)
            }
        })
        .collect();
    let rows = match data {
        Data::Rows(r) => r,
        Data::Flag(b) => vec![vec![Value::UInt(u64::from(b))]],
        Data::Tuples(t) => {
            let res = Resolver::new(schema, catalog)?;
            t.iter()
                .map(|tuple| {
                    (0..schema.fields.len())
                        .map(|i| res.field(i, tuple))
                        .collect()
                })
                .collect()
        }
    };
    Ok(ResultSet {
        columns,
        rows,
        quality: ex.quality,
        trace: ex.trace,
    })
}
