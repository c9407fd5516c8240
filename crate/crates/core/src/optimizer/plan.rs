use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{
    classical_cost, expected_runtime, ClassicalConstants, ClassicalOp, OpKind, OperatorProfile,
};
use crate::sim::DeviceModel;
use crate::sql::logical::{LogicalOp, Schema};
use crate::sql::physical::{PhysicalNode, QuantumArtifact};
use crate::sql::quantum::QuantumAnnotation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanMode {
    #[default]
    Auto,
    ForceQuantum,
    ForceClassical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Policy {
    pub mode: PlanMode,
    /// Relative gap (T_c − E_q) / T_c up to which a cheaper quantum node waits for runtime queue state.
    pub deferred_band: f64,
    /// Expected device queue delay, used when deferred nodes are bound.
    pub queue_delay_ns: f64,
    pub classical: ClassicalConstants,
    /// Per-operator wall-clock limit on quantum work before falling back.
    pub latency_budget_ns: Option<f64>,
}

impl Default for Policy {
    fn default() -> Self {
        Self {
            mode: PlanMode::Auto,
            deferred_band: 0.2,
            queue_delay_ns: 0.0,
            classical: ClassicalConstants::default(),
            latency_budget_ns: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Binding {
    Classical,
    Quantum,
    /// Chosen at execution time from the current queue delay.
    Deferred,
}

#[derive(Debug, Clone)]
pub struct PlanNode {
    pub op: LogicalOp,
    pub schema: Schema,
    pub children: Vec<PlanNode>,
    pub ann: QuantumAnnotation,
    pub artifact: Option<QuantumArtifact>,
    pub profile: Option<OperatorProfile>,
    pub demotion: Option<String>,
    pub binding: Binding,
    pub classical_ns: f64,
    /// E[T] of the quantum realization with classical fallback.
    pub quantum_expected_ns: Option<f64>,
}

impl PlanNode {
    pub fn kind(&self) -> Option<OpKind> {
        self.ann.kind
    }

    pub fn is_quantum(&self) -> bool {
        self.binding == Binding::Quantum
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(PlanNode::size).sum::<usize>()
    }

    pub fn walk<'a>(&'a self, out: &mut Vec<&'a PlanNode>) {
        out.push(self);
        for c in &self.children {
            c.walk(out);
        }
    }

    fn render(&self, depth: usize, out: &mut String) {
        let _ = write!(out, "{}{}", "  ".repeat(depth), self.op);
        match self.binding {
            Binding::Quantum | Binding::Deferred => {
                let tag = if self.binding == Binding::Quantum {
                    "quantum"
                } else {
                    "deferred"
                };
                let _ = write!(out, " [realization={tag}]");
                if let Some(alg) = self.ann.algorithm {
                    let _ = write!(out, " [alg={alg}]");
                }
                if let Some(p) = &self.profile {
                    let _ = write!(
                        out,
                        " [Tq={:.3e}ns Pq={:.4} eps={:.4}]",
                        p.t_q_ns, p.p_q, p.eps_q
                    );
                }
                if let Some(a) = &self.artifact {
                    let _ = write!(
                        out,
                        " [qubits={} depth={} k={} shots={}]",
                        a.circuit.n_qubits, a.depth, a.iterations, a.shots
                    );
                }
                let _ = write!(
                    out,
                    " [Tc={:.3e}ns] [fallback=classical]",
                    self.classical_ns
                );
            }
            Binding::Classical => {
                let _ = write!(out, " [realization=classical]");
                if let Some(d) = &self.demotion {
                    let _ = write!(out, " [demoted={d}]");
                } else if let (Some(alg), Some(e)) = (self.ann.algorithm, self.quantum_expected_ns)
                {
                    let _ = write!(out, " [alg={alg}]");
                    if let Some(p) = &self.profile {
                        let _ = write!(
                            out,
                            " [Tq={:.3e}ns Pq={:.4} eps={:.4}]",
                            p.t_q_ns, p.p_q, p.eps_q
                        );
                    }
                    let _ = write!(out, " [Eq={e:.3e}ns Tc={:.3e}ns]", self.classical_ns);
                }
            }
        }
        out.push('\n');
        for c in &self.children {
            c.render(depth + 1, out);
        }
    }
}

/// Operator tree with one realization bound per node.
#[derive(Debug, Clone)]
pub struct HybridPlan {
    pub root: PlanNode,
}

impl HybridPlan {
    pub fn explain(&self) -> String {
        let mut s = String::new();
        self.root.render(0, &mut s);
        s
    }

    pub fn nodes(&self) -> Vec<&PlanNode> {
        let mut v = Vec::new();
        self.root.walk(&mut v);
        v
    }

    pub fn quantum_nodes(&self) -> usize {
        self.nodes()
            .iter()
            .filter(|n| n.binding != Binding::Classical)
            .count()
    }
}

fn scan_rows(node: &PhysicalNode) -> f64 {
    node.schema
        .bindings
        .iter()
        .map(|b| b.2 as f64)
        .product::<f64>()
        .max(1.0)
}

/// Baseline cost of the classical realization of `node` alone.
fn classical_ns(node: &PhysicalNode, c: &ClassicalConstants) -> f64 {
    let rows = |i: usize| node.children.get(i).map_or(0.0, scan_rows);
    let op = match &node.op {
        LogicalOp::Scan { .. } => ClassicalOp::Scan { n: scan_rows(node) },
        LogicalOp::EquiJoin { .. }
        | LogicalOp::NonEquiJoin { .. }
        | LogicalOp::SimilarityJoin { .. } => {
            let (n1, n2) = if node.ann.eligible {
                (node.ann.params.rows, node.ann.params.inner_rows)
            } else {
                (rows(0), rows(1))
            };
            let n2 = if n2 > 0.0 { n2 } else { rows(1) };
            ClassicalOp::Join {
                n1: n1.max(1.0),
                n2: n2.max(1.0),
            }
        }
        _ if node.ann.eligible && node.ann.params.rows > 0.0 => ClassicalOp::Scan {
            n: node.ann.params.rows,
        },
        _ => ClassicalOp::Scan { n: rows(0) },
    };
    classical_cost(op, c)
}

/// E[T] of the quantum realization: circuit time plus QROM transfer and
/// classical reconciliation of the reported hits, with classical fallback.
fn quantum_expected(
    node: &PhysicalNode,
    t_c: f64,
    device: &DeviceModel,
    c: &ClassicalConstants,
) -> Option<f64> {
    let (a, p) = (node.artifact.as_ref()?, node.profile.as_ref()?);
    let prm = node.ann.params;
    let transfer = a.loaded_bits * device.t_load_ns;
    let hits = (prm.selectivity * prm.rows.max(prm.inner_rows)).max(1.0)
        * a.calls.max(1.0).min(prm.rows.max(1.0));
    let reconcile = hits * c.c_tuple_ns;
    Some(expected_runtime(
        p.p_q,
        p.t_q_ns + transfer + reconcile,
        t_c,
    ))
}

fn bind(node: &PhysicalNode, device: &DeviceModel, policy: &Policy) -> PlanNode {
    let children = node
        .children
        .iter()
        .map(|c| bind(c, device, policy))
        .collect();
    let t_c = classical_ns(node, &policy.classical);
    let e_q = if node.has_quantum() {
        quantum_expected(node, t_c, device, &policy.classical)
    } else {
        None
    };
    let binding = match (policy.mode, e_q) {
        (_, None) | (PlanMode::ForceClassical, _) => Binding::Classical,
        (PlanMode::ForceQuantum, Some(_)) => Binding::Quantum,
        (PlanMode::Auto, Some(e)) => {
            // A queue delay only adds to E, so a node already at or above T_c stays classical.
            if e >= t_c {
                Binding::Classical
            } else if t_c - e <= policy.deferred_band * t_c {
                Binding::Deferred
            } else {
                Binding::Quantum
            }
        }
    };
    PlanNode {
        op: node.op.clone(),
        schema: node.schema.clone(),
        children,
        ann: node.ann.clone(),
        artifact: node.artifact.clone(),
        profile: node.profile,
        demotion: node.demotion.clone(),
        binding,
        classical_ns: t_c,
        quantum_expected_ns: e_q,
    }
}

/// Binds each operator to its quantum or classical realization by comparing
/// E[T] of the quantum path against the classical baseline.
pub fn plan(physical: &PhysicalNode, device: &DeviceModel, policy: &Policy) -> HybridPlan {
    HybridPlan {
        root: bind(physical, device, policy),
    }
}

fn resolve(node: &mut PlanNode, queue_delay_ns: f64) {
    if node.binding == Binding::Deferred {
        let e = node.quantum_expected_ns.unwrap_or(f64::INFINITY);
        node.binding = if e + queue_delay_ns < node.classical_ns {
            Binding::Quantum
        } else {
            Binding::Classical
        };
    }
    for c in &mut node.children {
        resolve(c, queue_delay_ns);
    }
}

/// Resolves deferred bindings given the queue delay observed at execution time.
pub fn bind_deferred(plan: &mut HybridPlan, queue_delay_ns: f64) {
    resolve(&mut plan.root, queue_delay_ns);
}

/// Observation from one quantum attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feedback {
    /// Fraction of shots that returned a verified hit.
    pub observed_success: f64,
    pub predicted_success: f64,
    /// Device time spent on the operator so far.
    pub elapsed_ns: f64,
    /// The result meets its exactness or error-bound requirement.
    pub quality_ok: bool,
}

/// Limits of the adaptation ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaptCaps {
    /// Shots may grow to this multiple of the initial count.
    pub max_shot_growth: usize,
    /// Observed success below this fraction of the prediction triggers adaptation.
    pub success_ratio: f64,
}

impl Default for AdaptCaps {
    fn default() -> Self {
        Self {
            max_shot_growth: 8,
            success_ratio: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptState {
    pub initial_shots: usize,
    pub shots: usize,
    pub iterations: usize,
    pub budget_ns: Option<f64>,
    pub switched_variant: bool,
    pub steps: usize,
    pub caps: AdaptCaps,
}

impl AdaptState {
    pub fn new(shots: usize, iterations: usize, budget_ns: Option<f64>) -> Self {
        Self {
            initial_shots: shots,
            shots,
            iterations,
            budget_ns,
            switched_variant: false,
            steps: 0,
            caps: AdaptCaps::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdaptationAction {
    None,
    IncreaseShots {
        shots: usize,
    },
    /// Fewer Grover iterations per shot with more shots.
    SwitchVariant {
        iterations: usize,
        shots: usize,
    },
    Fallback,
}

/// Next adaptation step. Shots double until the growth limit, then one switch
/// to a shallower variant, then classical fallback.
pub fn adapt(state: &mut AdaptState, fb: &Feedback) -> AdaptationAction {
    state.steps += 1;
    if state.budget_ns.is_some_and(|b| fb.elapsed_ns > b) {
        return AdaptationAction::Fallback;
    }
    if fb.quality_ok && fb.observed_success >= state.caps.success_ratio * fb.predicted_success {
        return AdaptationAction::None;
    }
    if state.shots * 2 <= state.initial_shots * state.caps.max_shot_growth {
        state.shots *= 2;
        return AdaptationAction::IncreaseShots { shots: state.shots };
    }
    if !state.switched_variant && state.iterations > 0 {
        state.switched_variant = true;
        state.iterations /= 2;
        return AdaptationAction::SwitchVariant {
            iterations: state.iterations,
            shots: state.shots,
        };
    }
    AdaptationAction::Fallback
}
