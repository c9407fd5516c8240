use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

use super::oracle::{CodePred, PredicateOracle, QromLoader};
use super::{compile_oracle, log2_exact, zero_reflection, CircuitError};
use crate::sim::{
    build_inverse_qft, evolve, run_sparse, sample_with, Backend, Circuit, Control, Gate,
    NoiseModel, SimError, SparseState, C64,
};

pub const MAX_PHASE_BITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeEstimate {
    pub a_hat: f64,
    pub phase_bits: usize,
    pub shots: usize,
    /// Most frequent phase-register outcome.
    pub modal: u64,
}

/// π/2^q + π²/2^{2q}: additive error of a q-bit phase-estimation readout.
pub fn estimate_bound(phase_bits: usize) -> f64 {
    let m = (1u64 << phase_bits) as f64;
    PI / m + PI * PI / (m * m)
}

/// Phase bits used when counting over an `n`-qubit RID register.
pub fn counting_phase_bits(n: usize) -> usize {
    (n.div_ceil(2) + 3).clamp(3, 10)
}

/// A state |ψ⟩ = A|0⟩ together with the sign pattern of the reflection S_χ
/// marking its good part. The Grover operator Q = −A·S₀·A†·S_χ equals
/// (2|ψ⟩⟨ψ| − I)·S_χ, so Q^y|ψ⟩ is computed on the support of |ψ⟩ alone.
#[derive(Debug, Clone)]
pub struct AeProblem {
    pub psi: Vec<(u64, C64)>,
    pub good: Vec<bool>,
}

impl AeProblem {
    /// Good subspace = `good_qubit` set in A|0⟩.
    pub fn from_state_prep(a: &Circuit, good_qubit: usize) -> Result<Self, CircuitError> {
        if good_qubit >= a.n_qubits {
            return Err(SimError::IndexOutOfRange {
                qubit: good_qubit,
                n_qubits: a.n_qubits,
            }
            .into());
        }
        let psi = run_sparse(a)?.sorted();
        let good = psi
            .iter()
            .map(|(i, _)| (i >> good_qubit) & 1 == 1)
            .collect();
        Ok(Self { psi, good })
    }

    /// Counting: A = H on the RID register, good subspace = states whose
    /// phase the oracle flips (read off by simulating the oracle on |s⟩).
    pub fn counting(oracle: &PredicateOracle) -> Result<Self, CircuitError> {
        let n = oracle.n();
        let amp = C64::new((-(n as f64) / 2.0).exp2(), 0.0);
        let psi: Vec<(u64, C64)> = (0..1u64 << n).map(|x| (x, amp)).collect();
        let mut s = SparseState::from_entries(oracle.n_qubits(), psi.clone());
        evolve(&mut s, &oracle.circuit)?;
        let out = s.sorted();
        if out.len() != psi.len() || out.iter().zip(&psi).any(|(o, i)| o.0 != i.0) {
            return Err(CircuitError::UnsupportedPredicate(
                "oracle left ancillas entangled".into(),
            ));
        }
        let good = out
            .iter()
            .zip(&psi)
            .map(|(o, i)| (o.1 + i.1).norm() < 1e-9)
            .collect();
        Ok(Self { psi, good })
    }

    /// Probability mass of the good subspace.
    pub fn a(&self) -> f64 {
        self.psi
            .iter()
            .zip(&self.good)
            .filter(|(_, &g)| g)
            .map(|((_, a), _)| a.norm_sqr())
            .sum()
    }

    /// Exact distribution of the `p`-bit phase-register outcome.
    pub fn outcome_distribution(&self, p: usize) -> Result<Vec<f64>, CircuitError> {
        if p == 0 || p > MAX_PHASE_BITS {
            return Err(SimError::CapacityExceeded {
                requested: p,
                cap: MAX_PHASE_BITS,
            }
            .into());
        }
        let m = 1usize << p;
        // Q^y|ψ⟩ stays in span{ψ_good, ψ_bad}; track its two coordinates.
        let norm_g = self.a().sqrt();
        let norm_b = (1.0 - self.a()).max(0.0).sqrt();
        let basis_g: Vec<C64> = self
            .psi
            .iter()
            .zip(&self.good)
            .map(|((_, a), &g)| {
                if g && norm_g > 0.0 {
                    a / norm_g
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect();
        let basis_b: Vec<C64> = self
            .psi
            .iter()
            .zip(&self.good)
            .map(|((_, a), &g)| {
                if !g && norm_b > 0.0 {
                    a / norm_b
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect();
        let psi: Vec<C64> = self.psi.iter().map(|e| e.1).collect();
        let mut v = psi.clone();
        let mut coord_g = Vec::with_capacity(m);
        let mut coord_b = Vec::with_capacity(m);
        for _ in 0..m {
            let cg: C64 = basis_g.iter().zip(&v).map(|(b, x)| b.conj() * x).sum();
            let cb: C64 = basis_b.iter().zip(&v).map(|(b, x)| b.conj() * x).sum();
            coord_g.push(cg);
            coord_b.push(cb);
            // S_χ then reflection about |ψ⟩
            for (x, &g) in v.iter_mut().zip(&self.good) {
                if g {
                    *x = -*x;
                }
            }
            let overlap: C64 = psi.iter().zip(&v).map(|(a, x)| a.conj() * x).sum();
            for (x, a) in v.iter_mut().zip(&psi) {
                *x = 2.0 * overlap * a - *x;
            }
        }
        let fft = FftPlanner::new().plan_fft_forward(m);
        fft.process(&mut coord_g);
        fft.process(&mut coord_b);
        let scale = 1.0 / (m as f64 * m as f64);
        Ok(coord_g
            .iter()
            .zip(&coord_b)
            .map(|(g, b)| (g.norm_sqr() + b.norm_sqr()) * scale)
            .collect())
    }

    pub fn estimate(
        &self,
        phase_bits: usize,
        shots: usize,
        seed: u64,
    ) -> Result<AmplitudeEstimate, CircuitError> {
        let dist = self.outcome_distribution(phase_bits)?;
        Ok(readout(&dist, phase_bits, shots, seed))
    }
}

fn readout(dist: &[f64], phase_bits: usize, shots: usize, seed: u64) -> AmplitudeEstimate {
    let table: Vec<(u64, f64)> = dist
        .iter()
        .enumerate()
        .map(|(y, &p)| (y as u64, p))
        .collect();
    let sampler = crate::sim::Sampler::new(&table);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0usize; dist.len()];
    for _ in 0..shots.max(1) {
        counts[sampler.draw(&mut rng) as usize] += 1;
    }
    let modal = counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(y, _)| y as u64)
        .unwrap_or(0);
    AmplitudeEstimate {
        a_hat: phase_to_amplitude(modal, phase_bits),
        phase_bits,
        shots,
        modal,
    }
}

fn phase_to_amplitude(y: u64, phase_bits: usize) -> f64 {
    (PI * y as f64 / (1u64 << phase_bits) as f64)
        .sin()
        .powi(2)
        .clamp(0.0, 1.0)
}

/// Amplitude estimation of Pr[good_qubit = 1] after `a`, read from the modal
/// outcome of `shots` samples of the exact phase-register distribution.
pub fn amplitude_estimate(
    a: &Circuit,
    good_qubit: usize,
    phase_bits: usize,
    shots: usize,
    seed: u64,
) -> Result<AmplitudeEstimate, CircuitError> {
    AeProblem::from_state_prep(a, good_qubit)?.estimate(phase_bits, shots, seed)
}

fn append_qpe(
    c: &mut Circuit,
    a: &[Gate],
    a_inv: &[Gate],
    s0_qubits: &[usize],
    phase_base: usize,
    phase_bits: usize,
    sx: &dyn Fn(usize) -> Vec<Gate>,
) -> Result<(), CircuitError> {
    c.extend(a.iter().cloned());
    c.extend((0..phase_bits).map(|j| Gate::h(phase_base + j)));
    let s0 = zero_reflection(s0_qubits);
    for j in 0..phase_bits {
        let ctrl = phase_base + j;
        for _ in 0..1usize << j {
            c.extend(sx(ctrl));
            c.extend(a_inv.iter().cloned());
            // the X conjugation cancels uncontrolled; only the phase flip needs the control
            c.extend(s0.iter().enumerate().map(|(i, g)| {
                if i == 1 {
                    g.clone().controlled_by(&[Control::on(ctrl)])
                } else {
                    g.clone()
                }
            }));
            c.extend(a.iter().cloned());
        }
        if j == 0 {
            // controlled global −1 of Q
            c.push(Gate::z(ctrl));
        }
    }
    let map: Vec<usize> = (0..phase_bits).map(|j| phase_base + j).collect();
    c.append(&build_inverse_qft(phase_bits)?.remapped(&map, c.n_qubits));
    Ok(())
}

/// Canonical phase-estimation circuit: A's register on qubits `0..m`, the
/// phase register on `m..m+phase_bits` (measured). Controlled Q only controls
/// its two reflections, since A·A† cancels when the control is off.
pub fn build_ae_circuit(
    a: &Circuit,
    good_qubit: usize,
    phase_bits: usize,
) -> Result<Circuit, CircuitError> {
    if phase_bits == 0 || phase_bits > MAX_PHASE_BITS {
        return Err(SimError::CapacityExceeded {
            requested: phase_bits,
            cap: MAX_PHASE_BITS,
        }
        .into());
    }
    let m = a.n_qubits;
    let mut c = Circuit::new(m + phase_bits).with_measured((m..m + phase_bits).collect());
    let all: Vec<usize> = (0..m).collect();
    let a_inv = a.inverse();
    append_qpe(
        &mut c,
        &a.gates,
        &a_inv.gates,
        &all,
        m,
        phase_bits,
        &|ctrl| vec![Gate::cz(ctrl, good_qubit)],
    )?;
    Ok(c)
}

/// Counting circuit for `oracle` with A = H on the RID register.
pub fn build_counting_circuit(
    oracle: &PredicateOracle,
    phase_bits: usize,
) -> Result<Circuit, CircuitError> {
    let m = oracle.n_qubits();
    let rid = oracle.layout.rid.clone();
    let mut c = Circuit::new(m + phase_bits).with_measured((m..m + phase_bits).collect());
    let h: Vec<Gate> = rid.iter().map(|&q| Gate::h(q)).collect();
    append_qpe(&mut c, &h, &h, &rid, m, phase_bits, &|ctrl| {
        oracle.controlled_gates(&[Control::on(ctrl)])
    })?;
    Ok(c)
}

/// Amplitude estimation by explicit gate-level phase estimation.
pub fn amplitude_estimate_circuit(
    a: &Circuit,
    good_qubit: usize,
    phase_bits: usize,
    shots: usize,
    noise: &NoiseModel,
) -> Result<AmplitudeEstimate, CircuitError> {
    let c = build_ae_circuit(a, good_qubit, phase_bits)?;
    let r = sample_with(&c, shots, noise, Backend::Sparse)?;
    let modal = r.modal().unwrap_or(0);
    Ok(AmplitudeEstimate {
        a_hat: phase_to_amplitude(modal, phase_bits),
        phase_bits,
        shots,
        modal,
    })
}

/// Estimated number of marked RIDs, round(N·â).
pub fn quantum_count(
    oracle: &PredicateOracle,
    phase_bits: usize,
    shots: usize,
    seed: u64,
) -> Result<usize, CircuitError> {
    let est = AeProblem::counting(oracle)?.estimate(phase_bits, shots, seed)?;
    Ok((est.a_hat * (1u64 << oracle.n()) as f64).round() as usize)
}

/// A: uniform RID superposition followed by RY(2·asin√(v(x)/V_max)) on the Good
/// qubit (index n) controlled by each RID pattern.
pub fn build_sum_state_prep(values: &[f64], v_max: f64) -> Result<(Circuit, usize), CircuitError> {
    let n = log2_exact(values.len())?.max(1);
    let padded: Vec<f64> = values
        .iter()
        .copied()
        .chain(std::iter::repeat(0.0))
        .take(1 << n)
        .collect();
    check_values(&padded, v_max)?;
    let mut c = Circuit::new(n + 1);
    c.extend((0..n).map(Gate::h));
    for (x, &v) in padded.iter().enumerate() {
        if v > 0.0 {
            c.push(rid_rotation(n, x, v / v_max, n, &[]));
        }
    }
    Ok((c, n))
}

fn check_values(values: &[f64], v_max: f64) -> Result<(), CircuitError> {
    if v_max.is_nan() || v_max <= 0.0 {
        return Err(CircuitError::ValueOutOfBounds {
            value: v_max,
            v_max,
        });
    }
    match values
        .iter()
        .find(|&&v| !(0.0..=v_max * (1.0 + 1e-12)).contains(&v))
    {
        Some(&value) => Err(CircuitError::ValueOutOfBounds { value, v_max }),
        None => Ok(()),
    }
}

fn rid_rotation(n: usize, x: usize, ratio: f64, good: usize, extra: &[Control]) -> Gate {
    let mut ctrls: Vec<Control> = (0..n)
        .map(|i| Control {
            qubit: i,
            polarity: (x >> i) & 1 == 1,
        })
        .collect();
    ctrls.extend_from_slice(extra);
    Gate::ry(good, 2.0 * ratio.clamp(0.0, 1.0).sqrt().asin()).controlled_by(&ctrls)
}

/// SUM-over-filter state preparation: RID superposition, predicate evaluated
/// into ancillas, per-row rotation of the Good qubit conditioned on the
/// predicate, predicate uncomputed. Returns (A, good qubit, oracle).
pub fn build_filtered_sum_prep(
    loader: &QromLoader,
    pred: &CodePred,
    values: &[f64],
    v_max: f64,
) -> Result<(Circuit, usize, PredicateOracle), CircuitError> {
    let oracle = compile_oracle(pred, loader)?;
    if values.len() != loader.rows {
        return Err(CircuitError::DimensionMismatch(values.len(), loader.rows));
    }
    check_values(values, v_max)?;
    let n = oracle.n();
    let good = oracle.n_qubits();
    let mut c = Circuit::new(good + 1);
    c.extend((0..n).map(Gate::h));
    if let Some(marking) = &oracle.marking {
        c.extend(oracle.compute.iter().cloned());
        for (x, &v) in values.iter().enumerate() {
            if v > 0.0 && oracle.is_marked(x) {
                c.push(rid_rotation(n, x, v / v_max, good, marking));
            }
        }
        c.extend(oracle.uncompute());
    }
    Ok((c, good, oracle))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SumEstimate {
    pub sum: f64,
    /// N·V_max·(π/2^q + π²/2^{2q}).
    pub bound: f64,
    pub a_hat: f64,
}

/// SUM(v) = N·V_max·Pr[Good = 1], estimated by amplitude estimation.
pub fn aggregate_sum(
    values: &[f64],
    v_max: f64,
    phase_bits: usize,
    shots: usize,
    seed: u64,
) -> Result<SumEstimate, CircuitError> {
    let (a, good) = build_sum_state_prep(values, v_max)?;
    let est = amplitude_estimate(&a, good, phase_bits, shots, seed)?;
    let scale = (1usize << (a.n_qubits - 1)) as f64 * v_max;
    Ok(SumEstimate {
        sum: scale * est.a_hat,
        bound: scale * estimate_bound(phase_bits),
        a_hat: est.a_hat,
    })
}
