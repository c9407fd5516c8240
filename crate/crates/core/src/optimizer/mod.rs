//! Cost model for quantum and classical realizations, hybrid plan selection,
//! runtime adaptation and crossover analysis.

mod crossover;
mod depth;
mod plan;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::{schedule_layers, Circuit, DeviceModel, LayerSchedule, SimError};

pub use crossover::{
    calibrate, crossover_analysis, crossover_csv, Calibration, CalibrationSample, CrossoverConfig,
    CrossoverReport, CrossoverRow, MRule,
};
pub use depth::{project_quantum_cost, DepthModel, Projection, ProjectionInput, QuantumConstants};
pub use plan::{
    adapt, bind_deferred, plan, AdaptCaps, AdaptState, AdaptationAction, Binding, Feedback,
    HybridPlan, PlanMode, PlanNode, Policy,
};

/// Operators with a quantum realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OpKind {
    EqualityFilter,
    RangeFilter,
    LikeFilter,
    Exists,
    EquiJoin,
    NonEquiJoin,
    SimilarityJoin,
    Min,
    Count,
    Sum,
    Avg,
    Sample,
}

impl OpKind {
    pub const ALL: [OpKind; 12] = [
        OpKind::EqualityFilter,
        OpKind::RangeFilter,
        OpKind::LikeFilter,
        OpKind::Exists,
        OpKind::EquiJoin,
        OpKind::NonEquiJoin,
        OpKind::SimilarityJoin,
        OpKind::Min,
        OpKind::Count,
        OpKind::Sum,
        OpKind::Avg,
        OpKind::Sample,
    ];

    /// Name of the quantum algorithm realizing the operator.
    pub fn algorithm(self) -> &'static str {
        match self {
            OpKind::EqualityFilter => "Grover (Search)",
            OpKind::RangeFilter => "Grover (Threshold Oracle)",
            OpKind::LikeFilter => "Grover (Prefix-Match Oracle)",
            OpKind::Exists => "Grover (Quantum Counting)",
            OpKind::EquiJoin => "Grover (Index Probing)",
            OpKind::NonEquiJoin => "Grover (Comparison Oracle)",
            OpKind::SimilarityJoin => "SWAP Test",
            OpKind::Min => "Dürr–Høyer Minimum Finding",
            OpKind::Count => "Amplitude Estimation",
            OpKind::Sum | OpKind::Avg => "Normalization + Amplitude Estimation",
            OpKind::Sample => "Amplitude Amplification (Sampling)",
        }
    }

    pub fn parse(name: &str) -> Result<OpKind, CostError> {
        let key: String = name
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Ok(match key.as_str() {
            "equalityfilter" | "filter" | "eq" => OpKind::EqualityFilter,
            "rangefilter" | "range" => OpKind::RangeFilter,
            "likefilter" | "like" => OpKind::LikeFilter,
            "exists" => OpKind::Exists,
            "equijoin" => OpKind::EquiJoin,
            "nonequijoin" => OpKind::NonEquiJoin,
            "similarityjoin" | "simjoin" => OpKind::SimilarityJoin,
            "min" => OpKind::Min,
            "count" => OpKind::Count,
            "sum" => OpKind::Sum,
            "avg" => OpKind::Avg,
            "sample" | "sampling" => OpKind::Sample,
            _ => return Err(CostError::UnknownOperator(name.to_string())),
        })
    }

    /// Grover-backed operators return exact results after reconciliation.
    pub fn is_exact(self) -> bool {
        !matches!(
            self,
            OpKind::Count | OpKind::Sum | OpKind::Avg | OpKind::SimilarityJoin
        )
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error("device has no duration for gate class {0}")]
    UnknownGateDuration(String),
    #[error("layer {layer} has total error {sum} ≥ 1")]
    LayerErrorOverflow { layer: usize, sum: f64 },
    #[error("operator {0} has no quantum cost formula")]
    UnknownOperator(String),
    #[error("no crossover in the swept range")]
    NoCrossover,
    #[error("calibration needs at least two samples with distinct sizes")]
    Underdetermined,
}

impl From<SimError> for CostError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::UnknownGateDuration(c) => CostError::UnknownGateDuration(c),
            other => CostError::UnknownOperator(other.to_string()),
        }
    }
}

/// Latency, success probability and approximation error of one quantum realization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorProfile {
    pub t_q_ns: f64,
    pub p_q: f64,
    pub eps_q: f64,
}

/// Σ_k (max_{g∈L_k} t_g + t_ctrl).
pub fn estimate_time(schedule: &LayerSchedule, device: &DeviceModel) -> f64 {
    schedule
        .durations
        .iter()
        .map(|t| t + device.t_ctrl_ns)
        .sum()
}

/// Schedules `circuit` on `device` and returns its T_q.
pub fn circuit_time(circuit: &Circuit, device: &DeviceModel) -> Result<f64, CostError> {
    Ok(estimate_time(&schedule_layers(circuit, device)?, device))
}

/// p_k = (1 − Σ ε_g)·exp(−t_k / T2_eff).
pub fn layer_success(errors: &[f64], t_k_ns: f64, t2_eff_ns: f64) -> Result<f64, CostError> {
    let sum: f64 = errors.iter().sum();
    if sum >= 1.0 {
        return Err(CostError::LayerErrorOverflow { layer: 0, sum });
    }
    Ok((1.0 - sum) * (-t_k_ns / t2_eff_ns).exp())
}

/// P_q = Π_k p_k over the layers of `schedule`, with t_k the layer's longest gate.
pub fn estimate_success(
    circuit: &Circuit,
    schedule: &LayerSchedule,
    device: &DeviceModel,
) -> Result<f64, CostError> {
    let mut p = 1.0;
    for (k, (layer, &t_k)) in schedule.layers.iter().zip(&schedule.durations).enumerate() {
        let errs: Vec<f64> = layer
            .iter()
            .map(|&g| device.error_rate(&circuit.gates[g]))
            .collect();
        p *= layer_success(&errs, t_k, device.t2_eff_ns).map_err(|e| match e {
            CostError::LayerErrorOverflow { sum, .. } => {
                CostError::LayerErrorOverflow { layer: k, sum }
            }
            e => e,
        })?;
    }
    Ok(p)
}

/// E[T] = P·T_quantum + (1 − P)·T_classical.
pub fn expected_runtime(p_q: f64, t_quantum_ns: f64, t_classical_ns: f64) -> f64 {
    p_q * t_quantum_ns + (1.0 - p_q) * t_classical_ns
}

/// Per-tuple constant of the classical baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalConstants {
    pub c_tuple_ns: f64,
}

impl Default for ClassicalConstants {
    fn default() -> Self {
        Self { c_tuple_ns: 100.0 }
    }
}

/// Classical operator shapes for the baseline cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassicalOp {
    /// Scan, filter or aggregation over `n` tuples.
    Scan { n: f64 },
    /// Nested-loop join without index.
    Join { n1: f64, n2: f64 },
}

pub fn classical_cost(op: ClassicalOp, c: &ClassicalConstants) -> f64 {
    match op {
        ClassicalOp::Scan { n } => n * c.c_tuple_ns,
        ClassicalOp::Join { n1, n2 } => n1 * n2 * c.c_tuple_ns,
    }
}

#[cfg(test)]
mod tests;
