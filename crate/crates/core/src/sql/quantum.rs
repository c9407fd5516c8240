use super::ast::{AggFunc, CmpOp};
use super::logical::{LogicalNode, LogicalOp, Schema};
use super::rewrite::estimate_selectivity;
use crate::circuits::rid_qubits;
use crate::optimizer::OpKind;
use crate::predicate::Predicate;
use crate::sim::DeviceModel;
use crate::storage::{Catalog, ColumnType, Table, Value, MAX_QUANTUM_BITS};

/// Sizes that feed the depth model and the cost projection.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OpParams {
    /// Rows of the (outer) input.
    pub rows: f64,
    /// Rows of the probed inner table for joins.
    pub inner_rows: f64,
    /// Widest value encoding involved.
    pub bits: u32,
    /// Vector dimension for similarity joins.
    pub dim: usize,
    pub conjuncts: usize,
    pub prefix_bits: u32,
    /// Estimated fraction of rows that match.
    pub selectivity: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuantumAnnotation {
    pub eligible: bool,
    pub algorithm: Option<&'static str>,
    pub kind: Option<OpKind>,
    /// Why an operator of a quantum-capable kind stays classical.
    pub reason: Option<String>,
    pub params: OpParams,
    /// The quantum realization evaluates its single-table input (a Scan or a
    /// Filter over a Scan) itself instead of consuming the child's rows.
    pub absorbs_input: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumNode {
    pub op: LogicalOp,
    pub schema: Schema,
    pub children: Vec<QuantumNode>,
    pub ann: QuantumAnnotation,
}

impl QuantumNode {
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(QuantumNode::size).sum::<usize>()
    }
}

/// `(table, binding, predicate)` when `node` reads one base table, optionally filtered.
pub(crate) fn single_source(node: &LogicalNode) -> Option<(String, String, Predicate)> {
    match &node.op {
        LogicalOp::Scan { table, binding } => {
            Some((table.clone(), binding.clone(), Predicate::Const(true)))
        }
        LogicalOp::Filter { predicate } if node.children.len() == 1 => match &node.children[0].op {
            LogicalOp::Scan { table, binding } => {
                Some((table.clone(), binding.clone(), predicate.clone()))
            }
            _ => None,
        },
        _ => None,
    }
}

fn atoms(p: &Predicate, out: &mut Vec<Predicate>) {
    match p {
        Predicate::And(v) | Predicate::Or(v) => v.iter().for_each(|q| atoms(q, out)),
        Predicate::Not(q) => atoms(q, out),
        Predicate::Const(_) | Predicate::Exists(_) => {}
        p => out.push(p.clone()),
    }
}

fn encodable(table: &Table, column: &str) -> Result<(usize, u32), String> {
    let idx = table.column_index(column).map_err(|e| e.to_string())?;
    match table.columns[idx].ty {
        ColumnType::UInt { bits } if bits <= MAX_QUANTUM_BITS => Ok((idx, bits as u32)),
        ColumnType::Text => Ok((idx, table.encoded_bits(idx).unwrap_or(1))),
        ty => Err(format!(
            "column {column} of type {ty} has no circuit encoding"
        )),
    }
}

fn fits(v: &Value, bits: u32) -> bool {
    match v.as_f64() {
        Some(x) if x.fract() == 0.0 && x >= 0.0 => bits >= 64 || (x as u64) >> bits == 0,
        _ => true,
    }
}

/// Checks that `pred` compiles to a phase oracle over `table`; returns the
/// widest encoding, the atom count and the widest prefix in bits.
pub(crate) fn oracle_support(table: &Table, pred: &Predicate) -> Result<(u32, usize, u32), String> {
    let mut list = Vec::new();
    atoms(pred, &mut list);
    let (mut bits, mut prefix_bits) = (1u32, 0u32);
    for a in &list {
        match a {
            Predicate::Eq { column, value } => {
                let (idx, b) = encodable(table, &column.column)?;
                let ok = match table.columns[idx].ty {
                    ColumnType::Text => value.as_str().is_some(),
                    _ => value.as_f64().is_some() && fits(value, b),
                };
                if !ok {
                    return Err(format!(
                        "constant {value} has no {b}-bit encoding in {column}"
                    ));
                }
                bits = bits.max(b);
            }
            Predicate::Range { column, .. } => {
                let (_, b) = encodable(table, &column.column)?;
                bits = bits.max(b);
            }
            Predicate::PrefixLike { column, prefix } => {
                let (idx, b) = encodable(table, &column.column)?;
                if table.columns[idx].ty != ColumnType::Text {
                    return Err(format!("LIKE on non-text column {column}"));
                }
                bits = bits.max(b);
                prefix_bits = prefix_bits.max(8 * prefix.len() as u32);
            }
            _ => {}
        }
    }
    Ok((bits, list.len().max(1), prefix_bits))
}

fn filter_kind(pred: &Predicate) -> OpKind {
    let mut list = Vec::new();
    atoms(pred, &mut list);
    if list
        .iter()
        .any(|a| matches!(a, Predicate::PrefixLike { .. }))
    {
        OpKind::LikeFilter
    } else if list.iter().any(|a| matches!(a, Predicate::Range { .. })) {
        OpKind::RangeFilter
    } else {
        OpKind::EqualityFilter
    }
}

/// Expected output cardinality under the selectivity model.
pub fn estimate_rows(node: &LogicalNode) -> f64 {
    match &node.op {
        LogicalOp::Scan { .. } => node.schema.bindings.first().map_or(0.0, |b| b.2 as f64),
        LogicalOp::Filter { predicate } => {
            estimate_rows(&node.children[0])
                * estimate_selectivity(predicate, &node.children[0].schema)
        }
        LogicalOp::Project { .. } => estimate_rows(&node.children[0]),
        LogicalOp::EquiJoin { right, .. } => {
            let (l, r) = (
                estimate_rows(&node.children[0]),
                estimate_rows(&node.children[1]),
            );
            let distinct = node.children[1]
                .schema
                .field(right)
                .map_or(1, |f| f.stats.distinct.max(1));
            l * r / distinct as f64
        }
        LogicalOp::NonEquiJoin { op, .. } => {
            let f = if *op == CmpOp::Ne { 0.9 } else { 1.0 / 3.0 };
            estimate_rows(&node.children[0]) * estimate_rows(&node.children[1]) * f
        }
        LogicalOp::SimilarityJoin { .. } => {
            estimate_rows(&node.children[0]) * estimate_rows(&node.children[1]) * 0.1
        }
        LogicalOp::Aggregate { .. } | LogicalOp::Exists => 1.0,
        LogicalOp::Sample { k } => estimate_rows(&node.children[0]).min(*k as f64),
    }
}

struct Ctx<'a> {
    catalog: &'a Catalog,
    device: &'a DeviceModel,
}

fn ineligible(reason: Option<String>) -> QuantumAnnotation {
    QuantumAnnotation {
        reason,
        ..Default::default()
    }
}

impl Ctx<'_> {
    fn table(&self, name: &str) -> Option<&Table> {
        self.catalog.table(name).ok()
    }

    /// Annotation for an operator that evaluates `source` with a phase oracle.
    fn over_source(
        &self,
        source: &LogicalNode,
        kind: OpKind,
        extra: Option<&Predicate>,
    ) -> QuantumAnnotation {
        let Some((tname, _, pred)) = single_source(source) else {
            return ineligible(Some("input is not a single filtered table".into()));
        };
        if pred.has_exists()
            && kind != OpKind::EqualityFilter
            && kind != OpKind::RangeFilter
            && kind != OpKind::LikeFilter
        {
            return ineligible(Some("EXISTS inside an absorbed filter".into()));
        }
        let Some(table) = self.table(&tname) else {
            return ineligible(Some(format!("unknown table {tname}")));
        };
        let full = match extra {
            Some(e) => Predicate::and(vec![pred.clone(), e.clone()]),
            None => pred.clone(),
        };
        match oracle_support(table, &full) {
            Ok((bits, conjuncts, prefix_bits)) => {
                let schema = &source.schema;
                QuantumAnnotation {
                    eligible: true,
                    algorithm: Some(kind.algorithm()),
                    kind: Some(kind),
                    reason: None,
                    params: OpParams {
                        rows: table.row_count() as f64,
                        inner_rows: 0.0,
                        bits,
                        dim: 0,
                        conjuncts,
                        prefix_bits,
                        selectivity: estimate_selectivity(&pred, schema),
                    },
                    absorbs_input: true,
                }
            }
            Err(e) => ineligible(Some(e)),
        }
    }

    fn annotate(&self, node: &LogicalNode) -> QuantumAnnotation {
        let cap_note = |mut a: QuantumAnnotation| {
            if a.eligible
                && rid_qubits(a.params.rows.max(a.params.inner_rows) as usize)
                    > self.device.qubit_cap
            {
                a.reason = Some("capacity".into());
            }
            a
        };
        match &node.op {
            LogicalOp::Scan { .. } | LogicalOp::Project { .. } => ineligible(None),
            LogicalOp::Filter { predicate } => {
                if !matches!(node.children[0].op, LogicalOp::Scan { .. }) {
                    return ineligible(Some("filter input is not a base table".into()));
                }
                let kind = filter_kind(predicate);
                let mut a = self.over_source(node, kind, None);
                a.absorbs_input = false;
                cap_note(a)
            }
            LogicalOp::Exists => {
                let inner = match &node.children[0].op {
                    LogicalOp::Project { .. } => &node.children[0].children[0],
                    _ => &node.children[0],
                };
                cap_note(self.over_source(inner, OpKind::Exists, None))
            }
            LogicalOp::Sample { .. } => {
                cap_note(self.over_source(&node.children[0], OpKind::Sample, None))
            }
            LogicalOp::Aggregate { calls } => {
                if calls.len() != 1 {
                    return ineligible(Some("more than one aggregate".into()));
                }
                let call = &calls[0];
                let src = &node.children[0];
                let kind = match call.func {
                    AggFunc::Count => OpKind::Count,
                    AggFunc::Sum => OpKind::Sum,
                    AggFunc::Avg => OpKind::Avg,
                    AggFunc::Min => OpKind::Min,
                };
                let mut a = self.over_source(src, kind, None);
                if !a.eligible {
                    return a;
                }
                if let Some(arg) = &call.arg {
                    let Some(f) = src.schema.field(arg) else {
                        return ineligible(Some(format!("unknown column {arg}")));
                    };
                    match kind {
                        OpKind::Min => match f.ty {
                            ColumnType::UInt { bits } if bits <= MAX_QUANTUM_BITS => {
                                a.params.bits = a.params.bits.max(bits as u32)
                            }
                            ty => {
                                return ineligible(Some(format!(
                                    "MIN over {ty} column has no comparator encoding"
                                )))
                            }
                        },
                        OpKind::Sum | OpKind::Avg => {
                            if f.stats
                                .min
                                .as_ref()
                                .and_then(Value::as_f64)
                                .is_some_and(|m| m < 0.0)
                            {
                                return ineligible(Some(
                                    "negative values cannot be amplitude-normalized".into(),
                                ));
                            }
                            a.params.bits = a.params.bits.max(match f.ty {
                                ColumnType::UInt { bits } => bits as u32,
                                _ => 16,
                            });
                        }
                        _ => {}
                    }
                }
                cap_note(a)
            }
            LogicalOp::EquiJoin { right, .. } | LogicalOp::NonEquiJoin { right, .. } => {
                let kind = if matches!(node.op, LogicalOp::EquiJoin { .. }) {
                    OpKind::EquiJoin
                } else {
                    OpKind::NonEquiJoin
                };
                let inner = &node.children[1];
                let probe_atom = Predicate::Range {
                    column: right.clone(),
                    low: None,
                    high: None,
                };
                let mut a = self.over_source(inner, kind, Some(&probe_atom));
                if !a.eligible {
                    return a;
                }
                if let Some((tname, _, _)) = single_source(inner) {
                    if let Some(t) = self.table(&tname) {
                        if t.column_def(&right.column)
                            .map(|c| c.ty == ColumnType::Real)
                            .unwrap_or(true)
                        {
                            return ineligible(Some(format!(
                                "join key {right} has no circuit encoding"
                            )));
                        }
                    }
                }
                a.params.inner_rows = a.params.rows;
                a.params.rows = estimate_rows(&node.children[0]);
                cap_note(a)
            }
            LogicalOp::SimilarityJoin { left, .. } => {
                let dim = match node.schema.field(left).map(|f| f.ty) {
                    Some(ColumnType::Vector { dim }) => dim,
                    _ => 1,
                };
                QuantumAnnotation {
                    eligible: true,
                    algorithm: Some(OpKind::SimilarityJoin.algorithm()),
                    kind: Some(OpKind::SimilarityJoin),
                    reason: None,
                    params: OpParams {
                        rows: estimate_rows(&node.children[0]),
                        inner_rows: estimate_rows(&node.children[1]),
                        bits: 0,
                        dim,
                        conjuncts: 0,
                        prefix_bits: 0,
                        selectivity: 0.1,
                    },
                    absorbs_input: false,
                }
            }
        }
    }
}

fn lower(node: &LogicalNode, ctx: &Ctx) -> QuantumNode {
    QuantumNode {
        op: node.op.clone(),
        schema: node.schema.clone(),
        children: node.children.iter().map(|c| lower(c, ctx)).collect(),
        ann: ctx.annotate(node),
    }
}

/// Marks the operators that have a quantum realization and records their
/// candidate algorithm. Every node keeps its classical realization.
pub fn lower_quantum(ir: &LogicalNode, catalog: &Catalog, device: &DeviceModel) -> QuantumNode {
    lower(ir, &Ctx { catalog, device })
}

/// The logical tree back from a quantum-annotated one.
pub fn to_logical(q: &QuantumNode) -> LogicalNode {
    LogicalNode {
        op: q.op.clone(),
        schema: q.schema.clone(),
        children: q.children.iter().map(to_logical).collect(),
    }
}
