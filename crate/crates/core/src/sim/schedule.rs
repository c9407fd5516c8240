use super::{Circuit, DeviceModel, SimError};

/// Greedy ASAP layering of a circuit.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LayerSchedule {
    /// Gate indices per layer, ascending within each layer.
    pub layers: Vec<Vec<usize>>,
    /// Longest gate duration in each layer, ns.
    pub durations: Vec<f64>,
}

impl LayerSchedule {
    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Schedule of `self` followed by `other`, with `other`'s gate indices shifted by `offset`.
    pub fn concat(&self, other: &LayerSchedule, offset: usize) -> LayerSchedule {
        let mut layers = self.layers.clone();
        layers.extend(
            other
                .layers
                .iter()
                .map(|l| l.iter().map(|g| g + offset).collect()),
        );
        let mut durations = self.durations.clone();
        durations.extend_from_slice(&other.durations);
        LayerSchedule { layers, durations }
    }
}

/// Each gate lands in the layer after the latest layer touching any of its
/// operands, so gates sharing a layer act on disjoint qubits.
pub fn schedule_layers(circuit: &Circuit, device: &DeviceModel) -> Result<LayerSchedule, SimError> {
    let mut next_free = vec![0usize; circuit.n_qubits];
    let mut sched = LayerSchedule::default();
    for (i, g) in circuit.gates.iter().enumerate() {
        let t = device.duration(g)?;
        let ops = g.operands();
        let layer = ops
            .iter()
            .map(|&q| next_free.get(q).copied().unwrap_or(0))
            .max()
            .unwrap_or(0);
        if layer == sched.layers.len() {
            sched.layers.push(Vec::new());
            sched.durations.push(0.0);
        }
        sched.layers[layer].push(i);
        sched.durations[layer] = sched.durations[layer].max(t);
        for &q in &ops {
            if q < next_free.len() {
                next_free[q] = layer + 1;
            }
        }
    }
    Ok(sched)
}
