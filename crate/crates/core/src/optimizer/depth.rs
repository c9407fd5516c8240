use serde::{Deserialize, Serialize};

use super::{CostError, OpKind};
use crate::sim::DeviceModel;

/// Numeric stand-ins for the symbolic per-operator depths and ancilla budgets,
/// in gate-layer units. Every coefficient is overridable from configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DepthModel {
    /// D_orc = orc · n · conjuncts.
    pub orc: f64,
    /// D_diff = diff_slope · n + diff_const.
    pub diff_slope: f64,
    pub diff_const: f64,
    /// D_cmp(b) = cmp · b.
    pub cmp: f64,
    /// D_pref = pref · prefix bits.
    pub pref: f64,
    /// D_prep(d) = prep · d.
    pub prep: f64,
    /// D_load = load · b_v.
    pub load: f64,
    /// D_rot.
    pub rot: f64,
    /// D_idx = idx · n.
    pub idx: f64,
    /// D_key = key · b_key.
    pub key: f64,
}

impl Default for DepthModel {
    fn default() -> Self {
        Self {
            orc: 4.0,
            diff_slope: 2.0,
            diff_const: 1.0,
            cmp: 6.0,
            pref: 2.0,
            prep: 2.0,
            load: 4.0,
            rot: 1.0,
            idx: 4.0,
            key: 2.0,
        }
    }
}

impl DepthModel {
    pub fn d_orc(&self, n: f64, conjuncts: usize) -> f64 {
        self.orc * n * conjuncts.max(1) as f64
    }
    pub fn d_diff(&self, n: f64) -> f64 {
        self.diff_slope * n + self.diff_const
    }
    pub fn d_cmp(&self, b: u32) -> f64 {
        self.cmp * b as f64
    }
    pub fn d_pref(&self, prefix_bits: u32) -> f64 {
        self.pref * prefix_bits as f64
    }
    pub fn d_prep(&self, d: usize) -> f64 {
        self.prep * d as f64
    }
    pub fn d_load(&self, b_v: u32) -> f64 {
        self.load * b_v as f64
    }
    pub fn d_rot(&self) -> f64 {
        self.rot
    }
    pub fn d_idx(&self, n: f64) -> f64 {
        self.idx * n
    }
    pub fn d_key(&self, b_key: u32) -> f64 {
        self.key * b_key as f64
    }

    /// Logic flags of a compound oracle.
    pub fn a_orc(&self, conjuncts: usize) -> usize {
        conjuncts.saturating_sub(1) + 1
    }
    /// Ripple-comparator carries plus its output flag.
    pub fn a_cmp(&self, b: u32) -> usize {
        b as usize + 1
    }
    /// One flag per prefix byte plus the match flag.
    pub fn a_pref(&self, prefix_bits: u32) -> usize {
        prefix_bits.div_ceil(8) as usize + 1
    }
    /// Amplitude-encoding register for a d-dimensional vector.
    pub fn a_prep(&self, d: usize) -> usize {
        q_bits(d)
    }
    /// The Good qubit of the rotation.
    pub fn a_rot(&self) -> usize {
        1
    }
    /// Phase register for additive error ε.
    pub fn q_eps(&self, eps: f64) -> usize {
        (std::f64::consts::PI / eps.clamp(1e-12, 1.0))
            .log2()
            .ceil()
            .max(1.0) as usize
    }

    /// Symbolic depth of one circuit call and the number of calls per shot batch.
    pub fn depth(&self, kind: OpKind, p: &ProjectionInput) -> (f64, f64) {
        let n = p.n.max(1.0).log2().ceil().max(1.0);
        let n2 = p.n_inner.max(1.0).log2().ceil().max(1.0);
        let ratio = (p.n / p.m.max(1.0)).max(1.0).sqrt();
        let inv_eps = 1.0 / p.eps.max(1e-12);
        match kind {
            OpKind::EqualityFilter | OpKind::Sample => {
                ((self.d_orc(n, p.conjuncts) + self.d_diff(n)) * ratio, 1.0)
            }
            OpKind::RangeFilter => ((self.d_cmp(p.b) + self.d_diff(n)) * ratio, 1.0),
            OpKind::LikeFilter => ((self.d_pref(p.prefix_bits) + self.d_diff(n)) * ratio, 1.0),
            OpKind::Exists => (
                (self.d_orc(n, p.conjuncts) + self.d_diff(n)) * p.n.max(1.0).sqrt(),
                1.0,
            ),
            OpKind::EquiJoin => (
                (self.d_idx(n2) + self.d_key(p.b) + self.d_diff(n2)) * p.n_inner.max(1.0).sqrt(),
                p.n,
            ),
            OpKind::NonEquiJoin => (
                (self.d_cmp(p.b) + self.d_diff(n2)) * p.n_inner.max(1.0).sqrt(),
                p.n,
            ),
            OpKind::SimilarityJoin => {
                (2.0 * self.d_prep(p.d) + q_bits(p.d) as f64, p.n * p.n_inner)
            }
            OpKind::Min => (
                (self.d_cmp(p.b) + self.d_diff(n)) * p.n.max(1.0).sqrt(),
                1.0,
            ),
            OpKind::Count => ((self.d_orc(n, p.conjuncts) + self.d_diff(n)) * inv_eps, 1.0),
            OpKind::Sum | OpKind::Avg => (
                (self.d_load(p.b) + self.d_rot() + self.d_diff(n)) * inv_eps,
                1.0,
            ),
        }
    }

    /// Qubits the realization needs.
    pub fn qubits(&self, kind: OpKind, p: &ProjectionInput) -> usize {
        let n = q_bits(p.n.max(1.0) as usize);
        let n2 = q_bits(p.n_inner.max(1.0) as usize);
        let b = p.b as usize;
        match kind {
            OpKind::EqualityFilter | OpKind::Sample | OpKind::Exists => {
                n + 2 + b + self.a_orc(p.conjuncts)
            }
            OpKind::RangeFilter | OpKind::Min => n + 2 + b + self.a_cmp(p.b),
            OpKind::LikeFilter => n + 2 + b + self.a_pref(p.prefix_bits),
            OpKind::EquiJoin => n2 + 2 + b + self.a_orc(p.conjuncts),
            OpKind::NonEquiJoin => n2 + 2 + b + self.a_cmp(p.b),
            OpKind::SimilarityJoin => 1 + 2 * self.a_prep(p.d),
            OpKind::Count => n + 2 + b + self.a_orc(p.conjuncts) + self.q_eps(p.eps),
            OpKind::Sum | OpKind::Avg => {
                n + 2 + b + self.a_orc(p.conjuncts) + self.a_rot() + self.q_eps(p.eps)
            }
        }
    }
}

fn q_bits(x: usize) -> usize {
    (usize::BITS - x.saturating_sub(1).leading_zeros()).max(1) as usize
}

/// Time and error per gate layer used to turn symbolic depth into latency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuantumConstants {
    pub layer_ns: f64,
    /// Fixed time per shot (readout and reset).
    pub shot_overhead_ns: f64,
    /// Summed gate error per layer.
    pub layer_error: f64,
    /// `null` in JSON means unbounded.
    #[serde(with = "crate::sim::unbounded")]
    pub t2_eff_ns: f64,
}

impl Default for QuantumConstants {
    fn default() -> Self {
        Self::from_device(&DeviceModel::default())
    }
}

impl QuantumConstants {
    /// Mean gate duration plus t_ctrl per layer, mean gate error per layer.
    pub fn from_device(device: &DeviceModel) -> Self {
        let mean = |m: &std::collections::BTreeMap<String, f64>| {
            if m.is_empty() {
                0.0
            } else {
                m.values().sum::<f64>() / m.len() as f64
            }
        };
        Self {
            layer_ns: mean(&device.gate_durations_ns) + device.t_ctrl_ns,
            shot_overhead_ns: device.t_measure_ns,
            layer_error: mean(&device.gate_errors),
            t2_eff_ns: device.t2_eff_ns,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ProjectionInput {
    pub n: f64,
    /// Expected matches.
    pub m: f64,
    pub n_inner: f64,
    pub b: u32,
    pub d: usize,
    pub eps: f64,
    pub conjuncts: usize,
    pub prefix_bits: u32,
    pub shots: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    /// Layers of one circuit call.
    pub depth: f64,
    /// Circuit calls per shot (probes or pairs).
    pub calls: f64,
    pub t_q_ns: f64,
    pub p_q: f64,
    pub qubits: usize,
}

/// Projects T_q and P_q from the symbolic depth of `kind`.
pub fn project_quantum_cost(
    kind: OpKind,
    input: &ProjectionInput,
    model: &DepthModel,
    constants: &QuantumConstants,
) -> Result<Projection, CostError> {
    let (depth, calls) = model.depth(kind, input);
    if !depth.is_finite() || depth < 0.0 {
        return Err(CostError::UnknownOperator(format!(
            "{kind:?} with non-finite depth"
        )));
    }
    let shots = input.shots.max(1) as f64;
    let t_q_ns = calls * shots * (depth * constants.layer_ns + constants.shot_overhead_ns);
    let per_layer = (1.0 - constants.layer_error.clamp(0.0, 1.0 - 1e-15)).ln()
        - constants.layer_ns / constants.t2_eff_ns;
    let p_q = (depth * per_layer).exp().clamp(f64::MIN_POSITIVE, 1.0);
    Ok(Projection {
        depth,
        calls,
        t_q_ns,
        p_q,
        qubits: model.qubits(kind, input),
    })
}
