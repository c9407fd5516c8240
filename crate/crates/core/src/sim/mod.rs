//! Gate-level circuit simulation.
//!
//! Two state backends share one gate semantics: a dense [`StateVector`]
//! (capped at [`DEFAULT_QUBIT_CAP`] qubits) and a [`SparseState`] that stores
//! only non-zero amplitudes. Sampling supports a stochastic noise model with
//! per-gate depolarizing faults and per-layer dephasing, realised as Pauli
//! trajectories.

mod circuit;
mod device;
mod gate;
mod schedule;
mod state;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use circuit::Circuit;
pub(crate) use device::unbounded;
pub use device::DeviceModel;
pub use gate::{Control, Gate, GateKind, QromTable};
pub use schedule::{schedule_layers, LayerSchedule};
pub use state::{Pauli, QuantumState, SparseState, StateVector, C64};

pub const DEFAULT_QUBIT_CAP: usize = 24;
pub const DEFAULT_SHOTS: usize = 2000;
/// Circuits at or below this width run densely under [`Backend::Auto`].
pub const DENSE_AUTO_LIMIT: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("qubit index {qubit} out of range for {n_qubits}-qubit circuit")]
    IndexOutOfRange { qubit: usize, n_qubits: usize },
    #[error("qubit {qubit} used more than once in one gate")]
    OverlappingOperands { qubit: usize },
    #[error("{requested} qubits exceeds the cap of {cap}")]
    CapacityExceeded { requested: usize, cap: usize },
    #[error("device has no duration for gate class {0}")]
    UnknownGateDuration(String),
    #[error("malformed gate: {0}")]
    MalformedGate(String),
    #[error("invalid device model: {0}")]
    InvalidDevice(String),
    #[error("shots must be at least 1")]
    NoShots,
}

/// Measurement counts keyed by the little-endian outcome over the measured qubits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotResult {
    pub counts: BTreeMap<u64, usize>,
    pub shots: usize,
    pub width: usize,
}

impl ShotResult {
    pub fn count(&self, outcome: u64) -> usize {
        self.counts.get(&outcome).copied().unwrap_or(0)
    }

    pub fn frequency(&self, outcome: u64) -> f64 {
        self.count(outcome) as f64 / self.shots as f64
    }

    /// Most frequent outcome; ties go to the smaller value.
    pub fn modal(&self) -> Option<u64> {
        self.counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .map(|(&k, _)| k)
    }

    /// Outcome rendered with the highest measured qubit first, e.g. 5 over 3 qubits → "101".
    pub fn bitstring(&self, outcome: u64) -> String {
        (0..self.width)
            .rev()
            .map(|i| if (outcome >> i) & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    /// Counts keyed by bitstring.
    pub fn bitstring_counts(&self) -> BTreeMap<String, usize> {
        self.counts
            .iter()
            .map(|(&k, &v)| (self.bitstring(k), v))
            .collect()
    }
}

/// Stochastic noise configuration for [`sample`].
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub enabled: bool,
    pub seed: u64,
    /// Supplies ε_g, t_g and T2_eff.
    pub device: DeviceModel,
    /// Most distinct faulty trajectories simulated per run; further faulty
    /// shots are drawn from a uniformly chosen simulated trajectory.
    pub max_trajectories: usize,
}

pub const DEFAULT_MAX_TRAJECTORIES: usize = 64;

impl NoiseModel {
    pub fn noiseless(seed: u64) -> Self {
        Self {
            enabled: false,
            seed,
            device: DeviceModel::noiseless(),
            max_trajectories: DEFAULT_MAX_TRAJECTORIES,
        }
    }

    pub fn from_device(device: &DeviceModel, seed: u64) -> Self {
        Self {
            enabled: true,
            seed,
            device: device.clone(),
            max_trajectories: DEFAULT_MAX_TRAJECTORIES,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    /// `usize::MAX` simulates every faulty shot independently.
    pub fn with_max_trajectories(mut self, cap: usize) -> Self {
        self.max_trajectories = cap.max(1);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    #[default]
    Auto,
    Dense,
    Sparse,
}

/// Runs `circuit` from |0…0⟩ on a dense statevector. Noiseless and deterministic.
pub fn run_statevector(circuit: &Circuit) -> Result<StateVector, SimError> {
    run_statevector_capped(circuit, DEFAULT_QUBIT_CAP)
}

pub fn run_statevector_capped(circuit: &Circuit, cap: usize) -> Result<StateVector, SimError> {
    circuit.validate()?;
    let mut sv = StateVector::zero(circuit.n_qubits, cap)?;
    for g in &circuit.gates {
        sv.apply(g);
    }
    Ok(sv)
}

/// Runs `circuit` from |0…0⟩ on the sparse backend.
pub fn run_sparse(circuit: &Circuit) -> Result<SparseState, SimError> {
    circuit.validate()?;
    let mut s = SparseState::zero(circuit.n_qubits)?;
    for g in &circuit.gates {
        s.apply(g);
    }
    Ok(s)
}

/// Applies `circuit` to an existing state (gates validated against the state width).
pub fn evolve<S: QuantumState>(state: &mut S, circuit: &Circuit) -> Result<(), SimError> {
    for g in &circuit.gates {
        g.validate(state.n_qubits())?;
    }
    for g in &circuit.gates {
        state.apply(g);
    }
    Ok(())
}

/// Samples `shots` measurements of `circuit.measured` (all qubits if empty).
pub fn sample(circuit: &Circuit, shots: usize, noise: &NoiseModel) -> Result<ShotResult, SimError> {
    sample_with(circuit, shots, noise, Backend::Auto)
}

pub fn sample_with(
    circuit: &Circuit,
    shots: usize,
    noise: &NoiseModel,
    backend: Backend,
) -> Result<ShotResult, SimError> {
    if shots == 0 {
        return Err(SimError::NoShots);
    }
    circuit.validate()?;
    let dense = match backend {
        Backend::Dense => true,
        Backend::Sparse => false,
        Backend::Auto => circuit.n_qubits <= DENSE_AUTO_LIMIT,
    };
    if dense {
        let init = StateVector::zero(
            circuit.n_qubits,
            noise.device.qubit_cap.max(DEFAULT_QUBIT_CAP),
        )?;
        Trajectories::new(circuit, noise)?.sample(init, shots)
    } else {
        Trajectories::new(circuit, noise)?.sample(SparseState::zero(circuit.n_qubits)?, shots)
    }
}

fn measured_qubits(circuit: &Circuit) -> Vec<usize> {
    if circuit.measured.is_empty() {
        (0..circuit.n_qubits).collect()
    } else {
        circuit.measured.clone()
    }
}

/// Draws outcomes from a (outcome, probability) table by inverse CDF.
pub(crate) struct Sampler {
    outcomes: Vec<u64>,
    cdf: Vec<f64>,
}

impl Sampler {
    pub(crate) fn new(dist: &[(u64, f64)]) -> Self {
        let mut acc = 0.0;
        let mut outcomes = Vec::with_capacity(dist.len());
        let mut cdf = Vec::with_capacity(dist.len());
        for &(o, p) in dist {
            acc += p;
            outcomes.push(o);
            cdf.push(acc);
        }
        Self { outcomes, cdf }
    }

    pub(crate) fn draw<R: Rng>(&self, rng: &mut R) -> u64 {
        let total = *self.cdf.last().unwrap_or(&1.0);
        let u = rng.gen::<f64>() * total;
        let idx = self
            .cdf
            .partition_point(|&c| c <= u)
            .min(self.outcomes.len() - 1);
        self.outcomes[idx]
    }
}

#[derive(Debug, Clone, Copy)]
struct Fault {
    after_gate: usize,
    qubit: usize,
    pauli: Pauli,
}

/// Noisy sampling by Pauli trajectories. Shots without any fault share one
/// simulation; faulty shots resume from the nearest fault-free checkpoint.
struct Trajectories<'a> {
    circuit: &'a Circuit,
    noise: &'a NoiseModel,
    gate_eps: Vec<f64>,
    layers: Vec<(Vec<usize>, f64)>,
}

impl<'a> Trajectories<'a> {
    fn new(circuit: &'a Circuit, noise: &'a NoiseModel) -> Result<Self, SimError> {
        if !noise.enabled {
            return Ok(Self {
                circuit,
                noise,
                gate_eps: Vec::new(),
                layers: Vec::new(),
            });
        }
        let gate_eps = circuit
            .gates
            .iter()
            .map(|g| noise.device.error_rate(g))
            .collect();
        let sched = schedule_layers(circuit, &noise.device)?;
        let layers = sched
            .layers
            .into_iter()
            .zip(sched.durations)
            .map(|(l, t)| (l, 1.0 - (-t / noise.device.t2_eff_ns).exp()))
            .collect();
        Ok(Self {
            circuit,
            noise,
            gate_eps,
            layers,
        })
    }

    fn draw_faults(&self, rng: &mut ChaCha8Rng) -> Vec<Fault> {
        let mut faults = Vec::new();
        let paulis = [Pauli::X, Pauli::Y, Pauli::Z];
        for (gi, &eps) in self.gate_eps.iter().enumerate() {
            if eps > 0.0 && rng.gen::<f64>() < eps {
                let ops = self.circuit.gates[gi].operands();
                let qubit = ops[rng.gen_range(0..ops.len())];
                faults.push(Fault {
                    after_gate: gi,
                    qubit,
                    pauli: paulis[rng.gen_range(0..3)],
                });
            }
        }
        for (layer, p_dephase) in &self.layers {
            if *p_dephase > 0.0 && rng.gen::<f64>() < *p_dephase {
                let gi = layer[rng.gen_range(0..layer.len())];
                let ops = self.circuit.gates[gi].operands();
                let qubit = ops[rng.gen_range(0..ops.len())];
                faults.push(Fault {
                    after_gate: gi,
                    qubit,
                    pauli: Pauli::Z,
                });
            }
        }
        faults.sort_by_key(|f| f.after_gate);
        faults
    }

    fn sample<S: QuantumState>(&self, init: S, shots: usize) -> Result<ShotResult, SimError> {
        let measured = measured_qubits(self.circuit);
        let mut rng = ChaCha8Rng::seed_from_u64(self.noise.seed);
        let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
        let gates = &self.circuit.gates;

        if !self.noise.enabled {
            let mut s = init;
            for g in gates {
                s.apply(g);
            }
            let sampler = Sampler::new(&s.marginal(&measured));
            for _ in 0..shots {
                *counts.entry(sampler.draw(&mut rng)).or_default() += 1;
            }
            return Ok(ShotResult {
                counts,
                shots,
                width: measured.len(),
            });
        }

        let plans: Vec<Vec<Fault>> = (0..shots).map(|_| self.draw_faults(&mut rng)).collect();
        let clean_shots = plans.iter().filter(|p| p.is_empty()).count();

        let stride = (gates.len() / 64).max(16);
        let mut checkpoints: Vec<S> = Vec::new();
        let mut s = init;
        for (i, g) in gates.iter().enumerate() {
            if i % stride == 0 {
                checkpoints.push(s.clone());
            }
            s.apply(g);
        }
        if clean_shots > 0 {
            let sampler = Sampler::new(&s.marginal(&measured));
            for _ in 0..clean_shots {
                *counts.entry(sampler.draw(&mut rng)).or_default() += 1;
            }
        }
        let faulty: Vec<&Vec<Fault>> = plans.iter().filter(|p| !p.is_empty()).collect();
        let simulated = faulty.len().min(self.noise.max_trajectories);
        let mut samplers = Vec::with_capacity(simulated);
        for plan in &faulty[..simulated] {
            let first = plan[0].after_gate;
            let cp = first / stride;
            let mut t = checkpoints[cp].clone();
            let mut next = 0;
            for (gi, g) in gates.iter().enumerate().skip(cp * stride) {
                t.apply(g);
                while next < plan.len() && plan[next].after_gate == gi {
                    t.apply_pauli(plan[next].qubit, plan[next].pauli);
                    next += 1;
                }
            }
            let sampler = Sampler::new(&t.marginal(&measured));
            *counts.entry(sampler.draw(&mut rng)).or_default() += 1;
            samplers.push(sampler);
        }
        for _ in simulated..faulty.len() {
            let sampler = &samplers[rng.gen_range(0..samplers.len())];
            *counts.entry(sampler.draw(&mut rng)).or_default() += 1;
        }
        Ok(ShotResult {
            counts,
            shots,
            width: measured.len(),
        })
    }
}

/// Quantum Fourier transform on qubits `0..n`: |x⟩ → 2^{-n/2} Σ_y e^{2πi·xy/2^n} |y⟩.
pub fn build_qft(n: usize) -> Result<Circuit, SimError> {
    if n == 0 || n > 12 {
        return Err(SimError::CapacityExceeded {
            requested: n,
            cap: 12,
        });
    }
    let mut c = Circuit::new(n);
    for i in (0..n).rev() {
        c.push(Gate::h(i));
        for m in (0..i).rev() {
            let angle = 2.0 * PI / f64::powi(2.0, (i - m + 1) as i32);
            c.push(Gate::phase(i, angle).controlled_by(&[Control::on(m)]));
        }
    }
    for i in 0..n / 2 {
        c.push(Gate::swap(i, n - 1 - i));
    }
    Ok(c)
}

/// Inverse QFT on qubits `0..n`.
pub fn build_inverse_qft(n: usize) -> Result<Circuit, SimError> {
    Ok(build_qft(n)?.inverse())
}

#[cfg(test)]
mod tests;
