use std::fmt;
use std::sync::Arc;

use super::SimError;

/// A control line. `polarity == true` fires on |1⟩, `false` on |0⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Control {
    pub qubit: usize,
    pub polarity: bool,
}

impl Control {
    pub fn on(qubit: usize) -> Self {
        Self {
            qubit,
            polarity: true,
        }
    }

    pub fn off(qubit: usize) -> Self {
        Self {
            qubit,
            polarity: false,
        }
    }
}

/// Classical lookup table applied coherently: |addr⟩|y⟩ → |addr⟩|y ⊕ data[addr]⟩.
///
/// Semantically this is the product of one multi-controlled X per address and
/// set data bit; [`QromTable::expand`] produces that product explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct QromTable {
    /// Address qubits, little-endian.
    pub address: Vec<usize>,
    /// One entry per address value; addresses past the end load zero.
    pub data: Vec<u64>,
}

impl QromTable {
    pub fn lookup(&self, addr: u64) -> u64 {
        self.data.get(addr as usize).copied().unwrap_or(0)
    }

    /// Per-address multi-controlled X decomposition, `targets` being the data qubits.
    pub fn expand(&self, targets: &[usize], extra: &[Control]) -> Vec<Gate> {
        let mut out = Vec::new();
        for (addr, &word) in self.data.iter().enumerate() {
            if word == 0 {
                continue;
            }
            let mut controls: Vec<Control> = self
                .address
                .iter()
                .enumerate()
                .map(|(i, &q)| Control {
                    qubit: q,
                    polarity: (addr >> i) & 1 == 1,
                })
                .collect();
            controls.extend_from_slice(extra);
            for (bit, &t) in targets.iter().enumerate() {
                if (word >> bit) & 1 == 1 {
                    out.push(Gate {
                        kind: GateKind::X,
                        targets: vec![t],
                        controls: controls.clone(),
                    });
                }
            }
        }
        out
    }
}

/// Base operation of a gate. Any kind may additionally carry controls, so
/// CNOT is `X` with one control, MCZ is `Z` with several, CSWAP is a
/// controlled `Swap` and so on.
#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    H,
    X,
    Z,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    /// diag(1, e^{iθ}).
    Phase(f64),
    Swap,
    Qrom(Arc<QromTable>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub controls: Vec<Control>,
}

impl Gate {
    fn single(kind: GateKind, q: usize) -> Self {
        Self {
            kind,
            targets: vec![q],
            controls: Vec::new(),
        }
    }

    pub fn h(q: usize) -> Self {
        Self::single(GateKind::H, q)
    }
    pub fn x(q: usize) -> Self {
        Self::single(GateKind::X, q)
    }
    pub fn z(q: usize) -> Self {
        Self::single(GateKind::Z, q)
    }
    pub fn rx(q: usize, theta: f64) -> Self {
        Self::single(GateKind::Rx(theta), q)
    }
    pub fn ry(q: usize, theta: f64) -> Self {
        Self::single(GateKind::Ry(theta), q)
    }
    pub fn rz(q: usize, theta: f64) -> Self {
        Self::single(GateKind::Rz(theta), q)
    }
    pub fn phase(q: usize, theta: f64) -> Self {
        Self::single(GateKind::Phase(theta), q)
    }
    pub fn cnot(control: usize, target: usize) -> Self {
        Self::x(target).controlled_by(&[Control::on(control)])
    }
    pub fn cz(control: usize, target: usize) -> Self {
        Self::z(target).controlled_by(&[Control::on(control)])
    }
    pub fn swap(a: usize, b: usize) -> Self {
        Self {
            kind: GateKind::Swap,
            targets: vec![a, b],
            controls: Vec::new(),
        }
    }
    pub fn cswap(control: usize, a: usize, b: usize) -> Self {
        Self::swap(a, b).controlled_by(&[Control::on(control)])
    }
    pub fn mcx(controls: &[Control], target: usize) -> Self {
        Self::x(target).controlled_by(controls)
    }
    pub fn mcz(controls: &[Control], target: usize) -> Self {
        Self::z(target).controlled_by(controls)
    }
    pub fn qrom(table: Arc<QromTable>, data_qubits: Vec<usize>) -> Self {
        Self {
            kind: GateKind::Qrom(table),
            targets: data_qubits,
            controls: Vec::new(),
        }
    }

    /// Adds controls to this gate (in addition to any it already has).
    pub fn controlled_by(mut self, extra: &[Control]) -> Self {
        self.controls.extend_from_slice(extra);
        self
    }

    pub fn inverse(&self) -> Gate {
        let kind = match &self.kind {
            GateKind::Rx(t) => GateKind::Rx(-t),
            GateKind::Ry(t) => GateKind::Ry(-t),
            GateKind::Rz(t) => GateKind::Rz(-t),
            GateKind::Phase(t) => GateKind::Phase(-t),
            other => other.clone(),
        };
        Gate {
            kind,
            targets: self.targets.clone(),
            controls: self.controls.clone(),
        }
    }

    pub fn theta(&self) -> Option<f64> {
        match self.kind {
            GateKind::Rx(t) | GateKind::Ry(t) | GateKind::Rz(t) | GateKind::Phase(t) => Some(t),
            _ => None,
        }
    }

    /// Every qubit the gate touches: targets, controls and QROM address lines.
    pub fn operands(&self) -> Vec<usize> {
        let mut ops = self.targets.clone();
        ops.extend(self.controls.iter().map(|c| c.qubit));
        if let GateKind::Qrom(table) = &self.kind {
            ops.extend_from_slice(&table.address);
        }
        ops
    }

    /// True for gates that map basis states to basis states (up to phase).
    pub fn is_permutation(&self) -> bool {
        matches!(self.kind, GateKind::X | GateKind::Swap | GateKind::Qrom(_))
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(
            self.kind,
            GateKind::Z | GateKind::Rz(_) | GateKind::Phase(_)
        )
    }

    pub fn validate(&self, n_qubits: usize) -> Result<(), SimError> {
        let expected_targets = match self.kind {
            GateKind::Swap => 2,
            GateKind::Qrom(_) => self.targets.len(),
            _ => 1,
        };
        if self.targets.len() != expected_targets || self.targets.is_empty() {
            return Err(SimError::MalformedGate(format!(
                "{} expects {} target(s), got {}",
                self.name(),
                expected_targets,
                self.targets.len()
            )));
        }
        if let GateKind::Qrom(table) = &self.kind {
            if self.targets.len() > 63 || table.address.len() > 63 {
                return Err(SimError::MalformedGate(
                    "QROM register wider than 63 qubits".into(),
                ));
            }
        }
        let ops = self.operands();
        for &q in &ops {
            if q >= n_qubits {
                return Err(SimError::IndexOutOfRange { qubit: q, n_qubits });
            }
        }
        let mut seen = vec![false; n_qubits];
        for &q in &ops {
            if seen[q] {
                return Err(SimError::OverlappingOperands { qubit: q });
            }
            seen[q] = true;
        }
        Ok(())
    }

    /// Display name: CNOT, MCZ, CSWAP, CRY, MCRY, ...
    pub fn name(&self) -> String {
        let base = match self.kind {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Z => "Z",
            GateKind::Rx(_) => "RX",
            GateKind::Ry(_) => "RY",
            GateKind::Rz(_) => "RZ",
            GateKind::Phase(_) => "P",
            GateKind::Swap => "SWAP",
            GateKind::Qrom(_) => return "QROM".into(),
        };
        match (self.controls.len(), &self.kind) {
            (0, _) => base.into(),
            (1, GateKind::X) => "CNOT".into(),
            (_, GateKind::X) => "MCX".into(),
            (1, GateKind::Z) => "CZ".into(),
            (_, GateKind::Z) => "MCZ".into(),
            (_, GateKind::Swap) => "CSWAP".into(),
            (1, _) => format!("C{base}"),
            (_, _) => format!("MC{base}"),
        }
    }

    /// Key used to look up duration and error rate in a device description.
    /// Controlled gates other than X/Z/SWAP share the `CU`/`MCU` classes.
    pub fn device_class(&self) -> &'static str {
        match (&self.kind, self.controls.len()) {
            (GateKind::Qrom(_), _) => "QROM",
            (GateKind::H, 0) => "H",
            (GateKind::X, 0) => "X",
            (GateKind::Z, 0) => "Z",
            (GateKind::Rx(_), 0) => "RX",
            (GateKind::Ry(_), 0) => "RY",
            (GateKind::Rz(_), 0) => "RZ",
            (GateKind::Phase(_), 0) => "P",
            (GateKind::Swap, 0) => "SWAP",
            (GateKind::X, 1) => "CNOT",
            (GateKind::Z, 1) => "CZ",
            (GateKind::Swap, _) => "CSWAP",
            (GateKind::X, _) => "MCX",
            (GateKind::Z, _) => "MCZ",
            (_, 1) => "CU",
            (_, _) => "MCU",
        }
    }

    /// Scaling multiplier applied to the device's per-class figures:
    /// multi-controlled classes are priced per control, QROM per address bit.
    pub fn cost_weight(&self) -> f64 {
        match (&self.kind, self.controls.len()) {
            (GateKind::Qrom(t), _) => t.address.len().max(1) as f64,
            (GateKind::Swap, c) if c >= 1 => c as f64,
            (_, c) if c >= 2 => c as f64,
            _ => 1.0,
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ", self.name())?;
        let targets: Vec<String> = self.targets.iter().map(|q| format!("q{q}")).collect();
        write!(f, "{}", targets.join(","))?;
        if !self.controls.is_empty() {
            let ctrl: Vec<String> = self
                .controls
                .iter()
                .map(|c| format!("q{}{}", c.qubit, if c.polarity { '+' } else { '-' }))
                .collect();
            write!(f, " ctrl={}", ctrl.join(","))?;
        }
        if let Some(theta) = self.theta() {
            write!(f, " theta={theta}")?;
        }
        if let GateKind::Qrom(table) = &self.kind {
            let addr: Vec<String> = table.address.iter().map(|q| format!("q{q}")).collect();
            write!(f, " addr={} entries={}", addr.join(","), table.data.len())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_follow_control_count() {
        assert_eq!(Gate::cnot(1, 0).name(), "CNOT");
        assert_eq!(
            Gate::mcx(&[Control::on(0), Control::off(1)], 2).name(),
            "MCX"
        );
        assert_eq!(Gate::cz(0, 1).name(), "CZ");
        assert_eq!(Gate::cswap(0, 1, 2).name(), "CSWAP");
        assert_eq!(
            Gate::ry(0, 0.3).controlled_by(&[Control::on(1)]).name(),
            "CRY"
        );
        assert_eq!(
            Gate::ry(0, 0.3)
                .controlled_by(&[Control::on(1), Control::on(2)])
                .name(),
            "MCRY"
        );
    }

    #[test]
    fn validation_catches_bad_operands() {
        assert!(matches!(
            Gate::h(3).validate(3),
            Err(SimError::IndexOutOfRange { qubit: 3, .. })
        ));
        assert!(matches!(
            Gate::cnot(1, 1).validate(3),
            Err(SimError::OverlappingOperands { qubit: 1 })
        ));
        assert!(Gate::cswap(0, 1, 2).validate(3).is_ok());
    }

    #[test]
    fn dump_line_format() {
        let g = Gate::ry(2, 0.5).controlled_by(&[Control::on(0), Control::off(1)]);
        assert_eq!(g.to_string(), "MCRY q2 ctrl=q0+,q1- theta=0.5");
        assert_eq!(Gate::cnot(1, 0).to_string(), "CNOT q0 ctrl=q1+");
    }
}
