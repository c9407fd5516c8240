//! Dense and sparse state representations sharing one gate semantics.
//!
//! Qubit 0 is the least-significant bit of the basis index.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::gate::{Gate, GateKind};
use super::SimError;

pub type C64 = Complex64;

const PRUNE: f64 = 1e-28;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// Operations every state backend supports. Gates are assumed validated.
pub trait QuantumState: Clone + Send {
    fn n_qubits(&self) -> usize;
    fn apply(&mut self, gate: &Gate);
    fn apply_pauli(&mut self, qubit: usize, pauli: Pauli);
    /// Born distribution of the given qubits, as (outcome, probability) sorted by outcome.
    fn marginal(&self, qubits: &[usize]) -> Vec<(u64, f64)>;
    fn norm_sqr(&self) -> f64;
    fn amplitude(&self, index: u64) -> C64;
}

fn control_mask(gate: &Gate) -> (u64, u64) {
    let mut mask = 0u64;
    let mut value = 0u64;
    for c in &gate.controls {
        mask |= 1 << c.qubit;
        if c.polarity {
            value |= 1 << c.qubit;
        }
    }
    (mask, value)
}

/// 2×2 unitary for single-target kinds.
fn matrix(kind: &GateKind) -> [[C64; 2]; 2] {
    let c = |re: f64, im: f64| C64::new(re, im);
    match *kind {
        GateKind::H => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            [[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]]
        }
        GateKind::X => [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
        GateKind::Z => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]],
        GateKind::Rx(t) => {
            let (s, co) = (t / 2.0).sin_cos();
            [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]
        }
        GateKind::Ry(t) => {
            let (s, co) = (t / 2.0).sin_cos();
            [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
        }
        GateKind::Rz(t) => [
            [C64::from_polar(1.0, -t / 2.0), c(0.0, 0.0)],
            [c(0.0, 0.0), C64::from_polar(1.0, t / 2.0)],
        ],
        GateKind::Phase(t) => [
            [c(1.0, 0.0), c(0.0, 0.0)],
            [c(0.0, 0.0), C64::from_polar(1.0, t)],
        ],
        GateKind::Swap | GateKind::Qrom(_) => unreachable!("multi-target kinds have no 2x2 matrix"),
    }
}

fn gather(index: u64, qubits: &[usize]) -> u64 {
    qubits
        .iter()
        .enumerate()
        .fold(0, |acc, (i, &q)| acc | (((index >> q) & 1) << i))
}

fn scatter(word: u64, qubits: &[usize]) -> u64 {
    qubits
        .iter()
        .enumerate()
        .fold(0, |acc, (i, &q)| acc | (((word >> i) & 1) << q))
}

/// Basis-index image of a permutation gate.
#[inline]
fn permute(gate: &Gate, index: u64) -> u64 {
    match &gate.kind {
        GateKind::X => index ^ (1 << gate.targets[0]),
        GateKind::Swap => {
            let (a, b) = (gate.targets[0], gate.targets[1]);
            let (ba, bb) = ((index >> a) & 1, (index >> b) & 1);
            if ba == bb {
                index
            } else {
                index ^ (1 << a) ^ (1 << b)
            }
        }
        GateKind::Qrom(table) => {
            index ^ scatter(table.lookup(gather(index, &table.address)), &gate.targets)
        }
        _ => unreachable!(),
    }
}

/// Phase a diagonal gate applies to a basis state whose controls fired.
#[inline]
fn diagonal_phase(gate: &Gate, index: u64) -> Option<C64> {
    let bit = (index >> gate.targets[0]) & 1 == 1;
    match gate.kind {
        GateKind::Z => bit.then(|| C64::new(-1.0, 0.0)),
        GateKind::Phase(t) => bit.then(|| C64::from_polar(1.0, t)),
        GateKind::Rz(t) => Some(C64::from_polar(1.0, if bit { t / 2.0 } else { -t / 2.0 })),
        _ => unreachable!(),
    }
}

fn pauli_image(index: u64, qubit: usize, pauli: Pauli) -> (u64, C64) {
    let bit = (index >> qubit) & 1 == 1;
    match pauli {
        Pauli::X => (index ^ (1 << qubit), C64::new(1.0, 0.0)),
        Pauli::Z => (
            index,
            if bit {
                C64::new(-1.0, 0.0)
            } else {
                C64::new(1.0, 0.0)
            },
        ),
        // Y|0⟩ = i|1⟩, Y|1⟩ = -i|0⟩
        Pauli::Y => (
            index ^ (1 << qubit),
            if bit {
                C64::new(0.0, -1.0)
            } else {
                C64::new(0.0, 1.0)
            },
        ),
    }
}

/// Dense statevector of 2^n amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// |0…0⟩ on `n` qubits.
    pub fn zero(n_qubits: usize, cap: usize) -> Result<Self, SimError> {
        if n_qubits > cap {
            return Err(SimError::CapacityExceeded {
                requested: n_qubits,
                cap,
            });
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = C64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Builds a state from raw amplitudes (length must be a power of two).
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self, SimError> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(SimError::MalformedGate(format!(
                "amplitude vector length {len} is not a power of two"
            )));
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// |⟨self|other⟩|², insensitive to global phase.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Validates then applies.
    pub fn apply_checked(&mut self, gate: &Gate) -> Result<(), SimError> {
        gate.validate(self.n_qubits)?;
        self.apply(gate);
        Ok(())
    }
}

impl QuantumState for StateVector {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply(&mut self, gate: &Gate) {
        let (cm, cv) = control_mask(gate);
        let len = self.amps.len() as u64;
        match &gate.kind {
            GateKind::Qrom(_) => {
                let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
                for i in 0..len {
                    let j = if i & cm == cv { permute(gate, i) } else { i };
                    out[j as usize] = self.amps[i as usize];
                }
                self.amps = out;
            }
            GateKind::Swap => {
                let (a, b) = (1u64 << gate.targets[0], 1u64 << gate.targets[1]);
                for i in 0..len {
                    if i & cm == cv && i & a != 0 && i & b == 0 {
                        self.amps.swap(i as usize, (i ^ a ^ b) as usize);
                    }
                }
            }
            GateKind::X => {
                let t = 1u64 << gate.targets[0];
                for i in 0..len {
                    if i & t == 0 && i & cm == cv {
                        self.amps.swap(i as usize, (i | t) as usize);
                    }
                }
            }
            GateKind::Z | GateKind::Rz(_) | GateKind::Phase(_) => {
                for i in 0..len {
                    if i & cm == cv {
                        if let Some(p) = diagonal_phase(gate, i) {
                            self.amps[i as usize] *= p;
                        }
                    }
                }
            }
            kind => {
                let m = matrix(kind);
                let t = 1u64 << gate.targets[0];
                for i in 0..len {
                    if i & t == 0 && i & cm == cv {
                        let (i0, i1) = (i as usize, (i | t) as usize);
                        let (a, b) = (self.amps[i0], self.amps[i1]);
                        self.amps[i0] = m[0][0] * a + m[0][1] * b;
                        self.amps[i1] = m[1][0] * a + m[1][1] * b;
                    }
                }
            }
        }
    }

    fn apply_pauli(&mut self, qubit: usize, pauli: Pauli) {
        let mut out = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let (j, ph) = pauli_image(i as u64, qubit, pauli);
            out[j as usize] = a * ph;
        }
        self.amps = out;
    }

    fn marginal(&self, qubits: &[usize]) -> Vec<(u64, f64)> {
        let mut acc: BTreeMap<u64, f64> = BTreeMap::new();
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p > 0.0 {
                *acc.entry(gather(i as u64, qubits)).or_default() += p;
            }
        }
        acc.into_iter().collect()
    }

    fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    fn amplitude(&self, index: u64) -> C64 {
        self.amps.get(index as usize).copied().unwrap_or_default()
    }
}

/// Sparse state: only basis states with non-negligible amplitude are stored.
///
/// Circuits built around a RID register plus classically-loaded value
/// registers keep their support near 2^n_rid regardless of how many ancilla
/// qubits they use, which is what makes them simulable at all.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseState {
    n_qubits: usize,
    entries: Vec<(u64, C64)>,
}

impl SparseState {
    pub fn zero(n_qubits: usize) -> Result<Self, SimError> {
        if n_qubits > 63 {
            return Err(SimError::CapacityExceeded {
                requested: n_qubits,
                cap: 63,
            });
        }
        Ok(Self {
            n_qubits,
            entries: vec![(0, C64::new(1.0, 0.0))],
        })
    }

    pub fn from_entries(n_qubits: usize, entries: Vec<(u64, C64)>) -> Self {
        Self { n_qubits, entries }
    }

    pub fn entries(&self) -> &[(u64, C64)] {
        &self.entries
    }

    pub fn support(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self, cap: usize) -> Result<StateVector, SimError> {
        let mut sv = StateVector::zero(self.n_qubits, cap)?;
        sv.amps[0] = C64::new(0.0, 0.0);
        for &(i, a) in &self.entries {
            sv.amps[i as usize] += a;
        }
        Ok(sv)
    }

    pub fn from_dense(sv: &StateVector) -> Self {
        let entries = sv
            .amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > PRUNE)
            .map(|(i, &a)| (i as u64, a))
            .collect();
        Self {
            n_qubits: sv.n_qubits,
            entries,
        }
    }

    /// Sorted by basis index; used when two sparse states must be compared.
    pub fn sorted(&self) -> Vec<(u64, C64)> {
        let mut v = self.entries.clone();
        v.sort_unstable_by_key(|e| e.0);
        v
    }

    pub fn inner(&self, other: &SparseState) -> C64 {
        let a = self.sorted();
        let b = other.sorted();
        let (mut i, mut j) = (0, 0);
        let mut acc = C64::new(0.0, 0.0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[i].1.conj() * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    fn apply_branching(&mut self, gate: &Gate, cm: u64, cv: u64) {
        let m = matrix(&gate.kind);
        let t = 1u64 << gate.targets[0];
        let mut active: Vec<(u64, C64)> = Vec::with_capacity(self.entries.len());
        let mut out: Vec<(u64, C64)> = Vec::with_capacity(self.entries.len() * 2);
        for &(i, a) in &self.entries {
            if i & cm == cv {
                active.push((i, a));
            } else {
                out.push((i, a));
            }
        }
        active.sort_unstable_by_key(|&(i, _)| (i & !t, i & t));
        let mut k = 0;
        while k < active.len() {
            let base = active[k].0 & !t;
            let (mut a0, mut a1) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
            while k < active.len() && active[k].0 & !t == base {
                if active[k].0 & t == 0 {
                    a0 += active[k].1;
                } else {
                    a1 += active[k].1;
                }
                k += 1;
            }
            let n0 = m[0][0] * a0 + m[0][1] * a1;
            let n1 = m[1][0] * a0 + m[1][1] * a1;
            if n0.norm_sqr() > PRUNE {
                out.push((base, n0));
            }
            if n1.norm_sqr() > PRUNE {
                out.push((base | t, n1));
            }
        }
        self.entries = out;
    }
}

impl QuantumState for SparseState {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply(&mut self, gate: &Gate) {
        let (cm, cv) = control_mask(gate);
        if gate.is_permutation() {
            for e in &mut self.entries {
                if e.0 & cm == cv {
                    e.0 = permute(gate, e.0);
                }
            }
        } else if gate.is_diagonal() {
            for e in &mut self.entries {
                if e.0 & cm == cv {
                    if let Some(p) = diagonal_phase(gate, e.0) {
                        e.1 *= p;
                    }
                }
            }
        } else {
            self.apply_branching(gate, cm, cv);
        }
    }

    fn apply_pauli(&mut self, qubit: usize, pauli: Pauli) {
        for e in &mut self.entries {
            let (j, ph) = pauli_image(e.0, qubit, pauli);
            *e = (j, e.1 * ph);
        }
    }

    fn marginal(&self, qubits: &[usize]) -> Vec<(u64, f64)> {
        let mut acc: BTreeMap<u64, f64> = BTreeMap::new();
        for &(i, a) in &self.entries {
            *acc.entry(gather(i, qubits)).or_default() += a.norm_sqr();
        }
        acc.into_iter().collect()
    }

    fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|e| e.1.norm_sqr()).sum()
    }

    fn amplitude(&self, index: u64) -> C64 {
        self.entries
            .iter()
            .filter(|e| e.0 == index)
            .map(|e| e.1)
            .sum()
    }
}
