use std::fmt;

use super::gate::{Control, Gate, GateKind};
use super::SimError;

/// An ordered gate program over `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    /// Qubits read out by `sample`, in little-endian outcome order.
    pub measured: Vec<usize>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
            measured: Vec::new(),
        }
    }

    pub fn with_measured(mut self, measured: Vec<usize>) -> Self {
        self.measured = measured;
        self
    }

    pub fn push(&mut self, gate: Gate) -> &mut Self {
        self.gates.push(gate);
        self
    }

    pub fn extend<I: IntoIterator<Item = Gate>>(&mut self, gates: I) -> &mut Self {
        self.gates.extend(gates);
        self
    }

    /// Appends `other`'s gates (which must address the same qubit space).
    pub fn append(&mut self, other: &Circuit) -> &mut Self {
        self.gates.extend(other.gates.iter().cloned());
        self
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Reversed sequence of inverted gates.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
            measured: self.measured.clone(),
        }
    }

    /// Every gate gains the given controls.
    pub fn controlled(&self, controls: &[Control]) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self
                .gates
                .iter()
                .map(|g| g.clone().controlled_by(controls))
                .collect(),
            measured: self.measured.clone(),
        }
    }

    /// Relabels qubits through `map` (old index → new index) into an `n`-qubit circuit.
    pub fn remapped(&self, map: &[usize], n_qubits: usize) -> Circuit {
        let gates = self
            .gates
            .iter()
            .map(|g| {
                let kind = match &g.kind {
                    GateKind::Qrom(t) => {
                        let mut t = (**t).clone();
                        t.address = t.address.iter().map(|&q| map[q]).collect();
                        GateKind::Qrom(std::sync::Arc::new(t))
                    }
                    k => k.clone(),
                };
                Gate {
                    kind,
                    targets: g.targets.iter().map(|&q| map[q]).collect(),
                    controls: g
                        .controls
                        .iter()
                        .map(|c| Control {
                            qubit: map[c.qubit],
                            polarity: c.polarity,
                        })
                        .collect(),
                }
            })
            .collect();
        Circuit {
            n_qubits,
            gates,
            measured: self.measured.iter().map(|&q| map[q]).collect(),
        }
    }

    /// Replaces every QROM gate by its multi-controlled X expansion.
    pub fn expand_qrom(&self) -> Circuit {
        let mut out = Circuit::new(self.n_qubits).with_measured(self.measured.clone());
        for g in &self.gates {
            match &g.kind {
                GateKind::Qrom(table) => out.extend(table.expand(&g.targets, &g.controls)),
                _ => out.push(g.clone()),
            };
        }
        out
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for g in &self.gates {
            g.validate(self.n_qubits)?;
        }
        for &q in &self.measured {
            if q >= self.n_qubits {
                return Err(SimError::IndexOutOfRange {
                    qubit: q,
                    n_qubits: self.n_qubits,
                });
            }
        }
        Ok(())
    }

    /// Line-oriented text dump, one gate per line.
    pub fn dump(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.gates {
            writeln!(f, "{g}")?;
        }
        Ok(())
    }
}
