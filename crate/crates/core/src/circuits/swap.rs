use super::CircuitError;
use crate::sim::{run_statevector, sample, Circuit, Control, Gate, NoiseModel, QuantumState};

#[derive(Debug, Clone, PartialEq)]
pub struct SwapEstimate {
    /// 2·freq(0) − 1 clamped to [0, 1]; estimates |⟨x|y⟩|².
    pub estimate: f64,
    /// Observed frequency of ancilla = 0.
    pub p0: f64,
    pub shots: usize,
}

/// Register width for a `d`-dimensional vector: max(1, ⌈log2 d⌉).
pub(crate) fn register_width(d: usize) -> usize {
    super::rid_qubits(d)
}

/// Gates preparing v/‖v‖ (zero padded) on `qubits`, `qubits[0]` least significant.
pub(crate) fn encode_gates(v: &[f64], qubits: &[usize]) -> Result<Vec<Gate>, CircuitError> {
    let q = qubits.len();
    let mut amps = vec![0.0; 1 << q];
    amps[..v.len()].copy_from_slice(v);
    if amps.iter().all(|&a| a == 0.0) {
        return Err(CircuitError::ZeroVector);
    }
    // norms[l][k]: norm of the block of amplitudes sharing the top `l` bits `k`.
    let mut norms: Vec<Vec<f64>> = vec![amps.iter().map(|a| a * a).collect()];
    for _ in 0..q {
        let last = norms.last().expect("level");
        norms.push(last.chunks(2).map(|p| p[0] + p[1]).collect());
    }
    norms.reverse();
    let mut gates = Vec::new();
    for level in 0..q {
        let target = qubits[q - 1 - level];
        let leaf = level == q - 1;
        for prefix in 0..(1usize << level) {
            let theta = if leaf {
                2.0 * amps[2 * prefix + 1].atan2(amps[2 * prefix])
            } else {
                let lo = norms[level + 1][2 * prefix].sqrt();
                let hi = norms[level + 1][2 * prefix + 1].sqrt();
                2.0 * hi.atan2(lo)
            };
            if theta == 0.0 {
                continue;
            }
            let controls: Vec<Control> = (0..level)
                .map(|j| {
                    let qubit = qubits[q - 1 - j];
                    if (prefix >> (level - 1 - j)) & 1 == 1 {
                        Control::on(qubit)
                    } else {
                        Control::off(qubit)
                    }
                })
                .collect();
            gates.push(Gate::ry(target, theta).controlled_by(&controls));
        }
    }
    Ok(gates)
}

/// Circuit on ⌈log2 d⌉ qubits whose state has amplitudes v/‖v‖.
pub fn amplitude_encode(v: &[f64]) -> Result<Circuit, CircuitError> {
    let q = register_width(v.len());
    let qubits: Vec<usize> = (0..q).collect();
    let mut c = Circuit::new(q);
    c.extend(encode_gates(v, &qubits)?);
    Ok(c)
}

/// Ancilla on qubit 0, x on the next q qubits, y on the q after; measures the ancilla.
pub fn build_swap_test(x: &[f64], y: &[f64]) -> Result<Circuit, CircuitError> {
    if x.len() != y.len() {
        return Err(CircuitError::DimensionMismatch(x.len(), y.len()));
    }
    let q = register_width(x.len());
    let xs: Vec<usize> = (1..=q).collect();
    let ys: Vec<usize> = (q + 1..=2 * q).collect();
    let mut c = Circuit::new(2 * q + 1).with_measured(vec![0]);
    c.extend(encode_gates(x, &xs)?);
    c.extend(encode_gates(y, &ys)?);
    c.push(Gate::h(0));
    c.extend(xs.iter().zip(&ys).map(|(&a, &b)| Gate::cswap(0, a, b)));
    c.push(Gate::h(0));
    Ok(c)
}

/// Exact Pr[ancilla = 0] from the statevector.
pub fn swap_test_probability(x: &[f64], y: &[f64]) -> Result<f64, CircuitError> {
    let sv = run_statevector(&build_swap_test(x, y)?)?;
    Ok(sv
        .marginal(&[0])
        .iter()
        .filter(|(o, _)| *o == 0)
        .map(|(_, p)| p)
        .sum())
}

pub fn swap_test(
    x: &[f64],
    y: &[f64],
    shots: usize,
    noise: &NoiseModel,
) -> Result<SwapEstimate, CircuitError> {
    let c = build_swap_test(x, y)?;
    let r = sample(&c, shots, noise)?;
    let p0 = r.frequency(0);
    Ok(SwapEstimate {
        estimate: (2.0 * p0 - 1.0).clamp(0.0, 1.0),
        p0,
        shots,
    })
}
