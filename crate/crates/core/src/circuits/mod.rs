//! Database-operator circuits: predicate oracles, Grover search, amplitude
//! estimation, SWAP-test similarity and minimum finding.

mod estimation;
mod grover;
mod minimum;
mod oracle;
mod swap;

use std::f64::consts::PI;

use thiserror::Error;

use crate::sim::{Circuit, Control, Gate, SimError};

pub use estimation::{
    aggregate_sum, amplitude_estimate, amplitude_estimate_circuit, build_ae_circuit,
    build_counting_circuit, build_filtered_sum_prep, build_sum_state_prep, counting_phase_bits,
    estimate_bound, quantum_count, AeProblem, AmplitudeEstimate, SumEstimate,
};
pub use grover::{
    build_grover_circuit, equijoin_probe, grover_filter, grover_sample, grover_with_k,
    success_probability, GroverRun,
};
pub use minimum::{durr_hoyer_min, durr_hoyer_over, durr_hoyer_run, MinResult};
pub use oracle::{
    compile_oracle, AncillaCounts, CodePred, LoadedColumn, PredicateOracle, QromLoader,
    RegisterLayout,
};
pub use swap::{amplitude_encode, build_swap_test, swap_test, swap_test_probability, SwapEstimate};

/// Widest sparse state a circuit may use (basis indices are 64-bit).
pub const MAX_CIRCUIT_QUBITS: usize = 63;
/// Widest RID register compiled into a circuit.
pub const MAX_RID_QUBITS: usize = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("unsupported predicate: {0}")]
    UnsupportedPredicate(String),
    #[error("constant {value} does not fit in {bits} bits")]
    WidthOverflow { value: u64, bits: u32 },
    #[error("invalid counts: N = {n}, M = {m}")]
    InvalidCounts { n: usize, m: usize },
    #[error("no matching rows")]
    ZeroMatches,
    #[error("zero vector cannot be amplitude encoded")]
    ZeroVector,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("value {value} outside [0, {v_max}]")]
    ValueOutOfBounds { value: f64, v_max: f64 },
    #[error("{0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error(transparent)]
    Sim(#[from] SimError),
}

pub(crate) fn log2_exact(n: usize) -> Result<usize, CircuitError> {
    if n == 0 || !n.is_power_of_two() {
        return Err(CircuitError::NotPowerOfTwo(n));
    }
    Ok(n.trailing_zeros() as usize)
}

/// Smallest `n` with `2^n >= rows`, at least 1.
pub fn rid_qubits(rows: usize) -> usize {
    (usize::BITS - rows.saturating_sub(1).leading_zeros()).max(1) as usize
}

/// H on each of qubits `0..n`.
pub fn build_uniform_superposition(n: usize) -> Result<Circuit, CircuitError> {
    if n == 0 || n > MAX_RID_QUBITS {
        return Err(SimError::CapacityExceeded {
            requested: n,
            cap: MAX_RID_QUBITS,
        }
        .into());
    }
    let mut c = Circuit::new(n);
    c.extend((0..n).map(Gate::h));
    Ok(c)
}

/// I − 2|0…0⟩⟨0…0| on `qubits`.
pub(crate) fn zero_reflection(qubits: &[usize]) -> Vec<Gate> {
    let t = qubits[0];
    let ctrls: Vec<Control> = qubits[1..].iter().map(|&q| Control::off(q)).collect();
    vec![Gate::x(t), Gate::z(t).controlled_by(&ctrls), Gate::x(t)]
}

/// Diffusion gates on `qubits`: H^⊗n, phase flip of |0…0⟩, H^⊗n. Equals −(2|s⟩⟨s| − I).
pub(crate) fn diffusion_gates(qubits: &[usize]) -> Vec<Gate> {
    let mut g: Vec<Gate> = qubits.iter().map(|&q| Gate::h(q)).collect();
    g.extend(zero_reflection(qubits));
    g.extend(qubits.iter().map(|&q| Gate::h(q)));
    g
}

pub fn build_diffusion(n: usize) -> Circuit {
    let qubits: Vec<usize> = (0..n.max(1)).collect();
    let mut c = Circuit::new(n.max(1));
    c.extend(diffusion_gates(&qubits));
    c
}

/// max(1, ⌊(π/4)·√(N/M)⌋).
pub fn grover_iterations(n: usize, m: usize) -> Result<usize, CircuitError> {
    if m == 0 || m > n || !n.is_power_of_two() {
        return Err(CircuitError::InvalidCounts { n, m });
    }
    Ok(((PI / 4.0) * (n as f64 / m as f64).sqrt()).floor().max(1.0) as usize)
}

#[cfg(test)]
mod tests;
