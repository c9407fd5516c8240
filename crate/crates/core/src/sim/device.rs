use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::gate::Gate;
use super::SimError;

/// Timing and error characteristics of the target backend.
///
/// Durations and error rates are keyed by [`Gate::device_class`]. For the
/// multi-controlled classes (`MCX`, `MCZ`, `MCU`, `CSWAP`) the figure is per
/// control qubit; for `QROM` it is per address qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceModel {
    pub gate_durations_ns: BTreeMap<String, f64>,
    pub gate_errors: BTreeMap<String, f64>,
    /// Control/synchronisation overhead charged once per layer.
    pub t_ctrl_ns: f64,
    /// Effective coherence time; `null` in JSON means unbounded.
    #[serde(with = "unbounded")]
    pub t2_eff_ns: f64,
    /// Readout time charged once per shot.
    #[serde(default = "default_measure")]
    pub t_measure_ns: f64,
    /// Classical-to-quantum transfer cost per loaded row per bit.
    #[serde(default = "default_load")]
    pub t_load_ns: f64,
    #[serde(default = "default_cap")]
    pub qubit_cap: usize,
}

/// Serializes infinity as `null`, which JSON can represent.
pub(crate) mod unbounded {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_none()
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

fn default_measure() -> f64 {
    1_000.0
}
fn default_load() -> f64 {
    1.0
}
fn default_cap() -> usize {
    24
}

impl Default for DeviceModel {
    fn default() -> Self {
        let durations = [
            ("H", 20.0),
            ("X", 20.0),
            ("Z", 20.0),
            ("RX", 25.0),
            ("RY", 25.0),
            ("RZ", 25.0),
            ("P", 25.0),
            ("SWAP", 120.0),
            ("CNOT", 40.0),
            ("CZ", 40.0),
            ("CU", 60.0),
            ("CSWAP", 150.0),
            ("MCX", 60.0),
            ("MCZ", 60.0),
            ("MCU", 80.0),
            ("QROM", 80.0),
        ];
        let errors = [
            ("H", 1e-4),
            ("X", 1e-4),
            ("Z", 1e-4),
            ("RX", 1e-4),
            ("RY", 1e-4),
            ("RZ", 1e-4),
            ("P", 1e-4),
            ("SWAP", 6e-4),
            ("CNOT", 4e-4),
            ("CZ", 4e-4),
            ("CU", 5e-4),
            ("CSWAP", 8e-4),
            ("MCX", 1.5e-4),
            ("MCZ", 1.5e-4),
            ("MCU", 2e-4),
            ("QROM", 1.5e-4),
        ];
        Self {
            gate_durations_ns: durations.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            gate_errors: errors.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            t_ctrl_ns: 10.0,
            t2_eff_ns: 2_000_000.0,
            t_measure_ns: default_measure(),
            t_load_ns: default_load(),
            qubit_cap: default_cap(),
        }
    }
}

impl DeviceModel {
    /// A device with zero gate error and unbounded coherence.
    pub fn noiseless() -> Self {
        let mut d = Self::default();
        for v in d.gate_errors.values_mut() {
            *v = 0.0;
        }
        d.t2_eff_ns = f64::INFINITY;
        d
    }

    pub fn duration(&self, gate: &Gate) -> Result<f64, SimError> {
        let class = gate.device_class();
        self.gate_durations_ns
            .get(class)
            .map(|t| t * gate.cost_weight())
            .ok_or_else(|| SimError::UnknownGateDuration(class.to_string()))
    }

    /// Per-execution fault probability; classes absent from the table are error-free.
    pub fn error_rate(&self, gate: &Gate) -> f64 {
        let base = self
            .gate_errors
            .get(gate.device_class())
            .copied()
            .unwrap_or(0.0);
        (base * gate.cost_weight()).min(0.999_999)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for (k, &t) in &self.gate_durations_ns {
            if t.is_nan() || t <= 0.0 {
                return Err(SimError::InvalidDevice(format!(
                    "duration for {k} must be positive"
                )));
            }
        }
        for (k, &e) in &self.gate_errors {
            if !(0.0..1.0).contains(&e) {
                return Err(SimError::InvalidDevice(format!(
                    "error rate for {k} must be in [0,1)"
                )));
            }
        }
        if self.t2_eff_ns.is_nan() || self.t2_eff_ns <= 0.0 || self.t_ctrl_ns < 0.0 {
            return Err(SimError::InvalidDevice(
                "T2_eff must be positive and t_ctrl non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let d: DeviceModel =
            serde_json::from_str(text).map_err(|e| SimError::InvalidDevice(e.to_string()))?;
        d.validate()?;
        Ok(d)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::InvalidDevice(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}
