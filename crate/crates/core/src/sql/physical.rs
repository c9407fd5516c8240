use super::logical::{LogicalOp, Schema};
use super::quantum::to_logical;
use super::quantum::{single_source, QuantumAnnotation, QuantumNode};
use crate::circuits::{
    build_ae_circuit, build_counting_circuit, build_filtered_sum_prep, build_grover_circuit,
    build_swap_test, compile_oracle, estimate_bound, grover_iterations, rid_qubits, CircuitError,
    CodePred, QromLoader, RegisterLayout, MAX_CIRCUIT_QUBITS,
};
use crate::optimizer::{estimate_success, estimate_time, CostError, OpKind, OperatorProfile};
use crate::predicate::{Bound, Predicate};
use crate::sim::{schedule_layers, Circuit, DeviceModel, DEFAULT_SHOTS};
use crate::storage::{Catalog, Table, Value};

/// Threshold-search runs per Dürr–Høyer query.
const MIN_REPETITIONS: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalOptions {
    pub shots: usize,
    /// Phase-register width for amplitude-estimation aggregates.
    pub phase_bits: usize,
    pub device: DeviceModel,
}

impl Default for PhysicalOptions {
    fn default() -> Self {
        Self {
            shots: DEFAULT_SHOTS,
            phase_bits: 6,
            device: DeviceModel::default(),
        }
    }
}

/// Compiled circuit and execution parameters of a quantum realization.
#[derive(Debug, Clone)]
pub struct QuantumArtifact {
    /// Representative circuit of one call.
    pub circuit: Circuit,
    pub rid_qubits: usize,
    pub shots: usize,
    /// Grover iterations per call, or 2^q − 1 controlled applications for estimation.
    pub iterations: usize,
    pub phase_bits: Option<usize>,
    /// Circuit calls per query: probes for joins, pairs for similarity joins.
    pub calls: f64,
    pub depth: usize,
    /// T_q of one call.
    pub circuit_ns: f64,
    pub layout: Option<RegisterLayout>,
    /// Rows × bits loaded into QROM tables.
    pub loaded_bits: f64,
}

#[derive(Debug, Clone)]
pub struct PhysicalNode {
    pub op: LogicalOp,
    pub schema: Schema,
    pub children: Vec<PhysicalNode>,
    pub ann: QuantumAnnotation,
    pub artifact: Option<QuantumArtifact>,
    pub profile: Option<OperatorProfile>,
    /// Why an eligible node runs classically only.
    pub demotion: Option<String>,
}

impl PhysicalNode {
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(PhysicalNode::size).sum::<usize>()
    }

    /// True when the node has a usable quantum realization.
    pub fn has_quantum(&self) -> bool {
        self.artifact.is_some() && self.demotion.is_none()
    }
}

struct Compiled {
    circuit: Circuit,
    shots: usize,
    iterations: usize,
    phase_bits: Option<usize>,
    calls: f64,
    layout: Option<RegisterLayout>,
    loaded_bits: f64,
    eps: f64,
}

fn resolved(pred: &Predicate) -> Predicate {
    pred.resolve_exists(&[true; 64])
}

fn loaded_bits(loader: &QromLoader) -> f64 {
    (loader.rows
        * loader
            .columns
            .iter()
            .map(|c| c.bits as usize)
            .sum::<usize>()) as f64
}

fn grover_for(
    loader: &QromLoader,
    code: &CodePred,
    m_est: f64,
    shots: usize,
) -> Result<Compiled, CircuitError> {
    let oracle = compile_oracle(code, loader)?;
    let dom = loader.domain();
    let m = (m_est.round() as usize).clamp(1, dom);
    let k = grover_iterations(dom, m)?;
    Ok(Compiled {
        circuit: build_grover_circuit(&oracle, k),
        shots,
        iterations: k,
        phase_bits: None,
        calls: 1.0,
        layout: Some(oracle.layout.clone()),
        loaded_bits: loaded_bits(loader),
        eps: 0.0,
    })
}

fn source_table<'a>(catalog: &'a Catalog, name: &str) -> Result<&'a Table, CircuitError> {
    catalog
        .table(name)
        .map_err(|e| CircuitError::UnsupportedPredicate(e.to_string()))
}

fn probe_predicate(
    op: &LogicalOp,
    inner: &Table,
    right_col: &str,
) -> Result<Predicate, CircuitError> {
    let idx = inner
        .column_index(right_col)
        .map_err(|e| CircuitError::UnsupportedPredicate(e.to_string()))?;
    let key = if inner.row_count() > 0 {
        inner.value(0, idx)
    } else {
        Value::UInt(0)
    };
    let column = crate::predicate::ColumnRef::bare(right_col);
    Ok(match op {
        LogicalOp::NonEquiJoin { .. } => Predicate::Range {
            column,
            low: Some(Bound::inclusive(key)),
            high: None,
        },
        _ => Predicate::Eq { column, value: key },
    })
}

fn compile(
    node: &QuantumNode,
    catalog: &Catalog,
    opts: &PhysicalOptions,
) -> Result<Compiled, CircuitError> {
    let kind = node.ann.kind.expect("eligible nodes have a kind");
    let logical = to_logical(node);
    let shots = opts.shots;
    let p = node.ann.params;
    let source = |n: &super::LogicalNode| {
        single_source(n)
            .ok_or_else(|| CircuitError::UnsupportedPredicate("no single-table input".into()))
    };
    match kind {
        OpKind::EqualityFilter
        | OpKind::RangeFilter
        | OpKind::LikeFilter
        | OpKind::Sample
        | OpKind::Exists => {
            let src = match (&logical.op, kind) {
                (LogicalOp::Filter { .. }, _) => logical.clone(),
                (LogicalOp::Exists, _) => match &logical.children[0].op {
                    LogicalOp::Project { .. } => logical.children[0].children[0].clone(),
                    _ => logical.children[0].clone(),
                },
                _ => logical.children[0].clone(),
            };
            let (tname, _, pred) = source(&src)?;
            let table = source_table(catalog, &tname)?;
            let (loader, code) = QromLoader::from_table(table, &resolved(&pred))?;
            grover_for(
                &loader,
                &code,
                p.selectivity * table.row_count() as f64,
                shots,
            )
        }
        OpKind::EquiJoin | OpKind::NonEquiJoin => {
            let (tname, _, pred) = source(&logical.children[1])?;
            let table = source_table(catalog, &tname)?;
            let right = match &logical.op {
                LogicalOp::EquiJoin { right, .. } | LogicalOp::NonEquiJoin { right, .. } => {
                    right.column.clone()
                }
                _ => unreachable!("join kinds"),
            };
            let probe = probe_predicate(&logical.op, table, &right)?;
            let full = Predicate::and(vec![resolved(&pred), probe]);
            let (loader, code) = QromLoader::from_table(table, &full)?;
            let m = loader.marked_set(&code).len() as f64;
            let mut c = grover_for(&loader, &code, m, shots)?;
            c.calls = p.rows.max(1.0);
            Ok(c)
        }
        OpKind::SimilarityJoin => {
            let ones = vec![1.0; p.dim.max(1)];
            let mut alt = ones.clone();
            alt[0] = 2.0;
            Ok(Compiled {
                circuit: build_swap_test(&ones, &alt)?,
                shots,
                iterations: 0,
                phase_bits: None,
                calls: (p.rows * p.inner_rows).max(1.0),
                layout: None,
                loaded_bits: 0.0,
                eps: 1.5 / (shots as f64).sqrt(),
            })
        }
        OpKind::Count | OpKind::Sum | OpKind::Avg | OpKind::Min => {
            let (tname, _, pred) = source(&logical.children[0])?;
            let table = source_table(catalog, &tname)?;
            let (mut loader, code) = QromLoader::from_table(table, &resolved(&pred))?;
            let LogicalOp::Aggregate { calls } = &logical.op else {
                unreachable!("aggregate kinds")
            };
            let q = opts.phase_bits;
            let dom = loader.domain() as f64;
            let bound = estimate_bound(q);
            match kind {
                OpKind::Count => {
                    let oracle = compile_oracle(&code, &loader)?;
                    Ok(Compiled {
                        circuit: build_counting_circuit(&oracle, q)?,
                        shots,
                        iterations: (1 << q) - 1,
                        phase_bits: Some(q),
                        calls: 1.0,
                        layout: Some(oracle.layout.clone()),
                        loaded_bits: loaded_bits(&loader),
                        eps: dom * bound,
                    })
                }
                OpKind::Min => {
                    let arg = calls[0].arg.as_ref().expect("MIN has an argument");
                    let idx = table
                        .column_index(&arg.column)
                        .map_err(|e| CircuitError::UnsupportedPredicate(e.to_string()))?;
                    let bits = table.encoded_bits(idx).unwrap_or(1);
                    let values: Vec<u64> = (0..table.row_count())
                        .map(|r| table.encoded(r, idx).unwrap_or(0))
                        .collect();
                    let col = loader.add_column(&arg.column, bits, values)?;
                    let below =
                        CodePred::And(vec![code.clone(), CodePred::Interval { col, lo: 0, hi: 0 }]);
                    let mut c = grover_for(&loader, &below, 1.0, 1)?;
                    c.calls = MIN_REPETITIONS * (dom.log2().ceil().max(1.0));
                    Ok(c)
                }
                _ => {
                    let arg = calls[0].arg.as_ref().expect("SUM/AVG have an argument");
                    let idx = table
                        .column_index(&arg.column)
                        .map_err(|e| CircuitError::UnsupportedPredicate(e.to_string()))?;
                    let values: Vec<f64> = (0..table.row_count())
                        .map(|r| table.value(r, idx).as_f64().unwrap_or(0.0))
                        .collect();
                    let v_max = values.iter().copied().fold(0.0, f64::max).max(1.0);
                    let (a, good, oracle) =
                        build_filtered_sum_prep(&loader, &code, &values, v_max)?;
                    let eps_sum = dom * v_max * bound;
                    let eps = if kind == OpKind::Avg {
                        let m = (p.selectivity * table.row_count() as f64).max(1.0);
                        (eps_sum + v_max * dom * bound) / m
                    } else {
                        eps_sum
                    };
                    Ok(Compiled {
                        circuit: build_ae_circuit(&a, good, q)?,
                        shots,
                        iterations: (1 << q) - 1,
                        phase_bits: Some(q),
                        calls: if kind == OpKind::Avg { 2.0 } else { 1.0 },
                        layout: Some(oracle.layout.clone()),
                        loaded_bits: loaded_bits(&loader) + table.row_count() as f64 * 16.0,
                        eps,
                    })
                }
            }
        }
    }
}

fn profile(c: &Compiled, device: &DeviceModel) -> Result<(OperatorProfile, usize, f64), CostError> {
    let sched = schedule_layers(&c.circuit, device)?;
    let t_call = estimate_time(&sched, device);
    let p_q = estimate_success(&c.circuit, &sched, device)?.max(f64::MIN_POSITIVE);
    let t_q_ns = c.calls * c.shots as f64 * (t_call + device.t_measure_ns);
    Ok((
        OperatorProfile {
            t_q_ns,
            p_q,
            eps_q: c.eps,
        },
        sched.depth(),
        t_call,
    ))
}

fn lower(node: &QuantumNode, catalog: &Catalog, opts: &PhysicalOptions) -> PhysicalNode {
    let children = node
        .children
        .iter()
        .map(|c| lower(c, catalog, opts))
        .collect();
    let mut out = PhysicalNode {
        op: node.op.clone(),
        schema: node.schema.clone(),
        children,
        ann: node.ann.clone(),
        artifact: None,
        profile: None,
        demotion: None,
    };
    if !node.ann.eligible {
        return out;
    }
    if let Some(r) = &node.ann.reason {
        out.demotion = Some(r.clone());
        return out;
    }
    let n = rid_qubits(
        node.ann
            .params
            .rows
            .max(node.ann.params.inner_rows)
            .max(1.0) as usize,
    );
    if n > opts.device.qubit_cap && node.ann.kind != Some(OpKind::SimilarityJoin) {
        out.demotion = Some("capacity".into());
        return out;
    }
    match compile(node, catalog, opts) {
        Ok(c) if c.circuit.n_qubits > MAX_CIRCUIT_QUBITS => out.demotion = Some("capacity".into()),
        Ok(c) => match profile(&c, &opts.device) {
            Ok((prof, depth, t_call)) => {
                out.profile = Some(prof);
                out.artifact = Some(QuantumArtifact {
                    rid_qubits: c.layout.as_ref().map_or(0, |l| l.rid.len()),
                    circuit: c.circuit,
                    shots: c.shots,
                    iterations: c.iterations,
                    phase_bits: c.phase_bits,
                    calls: c.calls,
                    depth,
                    circuit_ns: t_call,
                    layout: c.layout,
                    loaded_bits: c.loaded_bits,
                });
            }
            Err(e) => out.demotion = Some(e.to_string()),
        },
        Err(CircuitError::Sim(crate::sim::SimError::CapacityExceeded { .. })) => {
            out.demotion = Some("capacity".into())
        }
        Err(e) => out.demotion = Some(e.to_string()),
    }
    out
}

/// Compiles the quantum realization of every eligible node and attaches its
/// profile. Nodes that cannot be compiled keep only their classical realization,
/// with the reason recorded.
pub fn lower_physical(
    qir: &QuantumNode,
    catalog: &Catalog,
    opts: &PhysicalOptions,
) -> PhysicalNode {
    lower(qir, catalog, opts)
}
