//! Small-N measurements that tie the symbolic cost model to the simulator.

use std::time::Instant;

use crate::circuits::{
    build_grover_circuit, compile_oracle, grover_iterations, grover_with_k, success_probability,
    CircuitError, QromLoader,
};
use crate::exec::classical_filter;
use crate::optimizer::{
    calibrate, circuit_time, Calibration, CalibrationSample, CostError, DepthModel, OpKind,
    ProjectionInput,
};
use crate::predicate::{Bound, ColumnRef, Predicate};
use crate::sim::{DeviceModel, NoiseModel};
use crate::storage::{ColumnDef, ColumnType, Table, Value};

/// One Grover run at `n = 2^log2_n` rows with `m` marked rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroverMeasurement {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub shots: usize,
    pub analytic_success: f64,
    pub empirical_success: f64,
    /// Simulated device time of one shot, including readout.
    pub shot_ns: f64,
    /// Symbolic depth of the same search under the depth model.
    pub model_depth: f64,
    /// Wall-clock time of the classical scan.
    pub classical_ns: f64,
}

/// Table `key(rid) = rid` with `2^log2_n` rows.
pub fn key_table(log2_n: u32) -> Table {
    let mut t = Table::new(
        "bench",
        vec![ColumnDef::new(
            "key",
            ColumnType::UInt {
                bits: log2_n.max(1) as u8,
            },
        )],
    )
    .expect("valid schema");
    t.insert_rows((0..1u64 << log2_n).map(|i| vec![Value::UInt(i)]).collect())
        .expect("rows fit the column");
    t
}

/// `key < m` as a predicate; equality when `m == 1`.
pub fn first_m(m: usize) -> Predicate {
    let column = ColumnRef::bare("key");
    if m == 1 {
        Predicate::Eq {
            column,
            value: Value::UInt(0),
        }
    } else {
        Predicate::Range {
            column,
            low: None,
            high: Some(Bound::exclusive(Value::UInt(m as u64))),
        }
    }
}

fn classical_scan_ns(table: &Table, pred: &Predicate) -> f64 {
    let reps = (1 << 16) / table.row_count().max(1) + 3;
    let mut best = f64::INFINITY;
    for _ in 0..5 {
        let t0 = Instant::now();
        for _ in 0..reps {
            std::hint::black_box(classical_filter(table, pred));
        }
        best = best.min(t0.elapsed().as_nanos() as f64 / reps as f64);
    }
    best
}

pub fn measure_grover(
    log2_n: u32,
    m: usize,
    shots: usize,
    noise: &NoiseModel,
    device: &DeviceModel,
    model: &DepthModel,
) -> Result<GroverMeasurement, CircuitError> {
    let table = key_table(log2_n);
    let pred = first_m(m);
    let (loader, code) = QromLoader::from_table(&table, &pred)?;
    let oracle = compile_oracle(&code, &loader)?;
    let n = table.row_count();
    let k = grover_iterations(n, m)?;
    let run = grover_with_k(&oracle, k, shots, noise)?;
    let circuit_ns = circuit_time(&build_grover_circuit(&oracle, k), device)
        .map_err(|e| CircuitError::UnsupportedPredicate(e.to_string()))?;
    let kind = if m == 1 {
        OpKind::EqualityFilter
    } else {
        OpKind::RangeFilter
    };
    let input = ProjectionInput {
        n: n as f64,
        m: m as f64,
        n_inner: n as f64,
        b: log2_n.max(1),
        d: 1,
        eps: 0.01,
        conjuncts: 1,
        prefix_bits: 0,
        shots: 1,
    };
    Ok(GroverMeasurement {
        n,
        m,
        k,
        shots,
        analytic_success: success_probability(n, m, k),
        empirical_success: run.success_estimate,
        shot_ns: circuit_ns + device.t_measure_ns,
        model_depth: model.depth(kind, &input).0,
        classical_ns: classical_scan_ns(&table, &pred),
    })
}

/// Calibration samples from single-match searches at `2^lo ..= 2^hi` rows.
pub fn grover_samples(
    lo: u32,
    hi: u32,
    device: &DeviceModel,
    model: &DepthModel,
    seed: u64,
) -> Result<Vec<CalibrationSample>, CircuitError> {
    (lo..=hi)
        .map(|e| {
            let g = measure_grover(
                e,
                1,
                1,
                &NoiseModel::noiseless(seed.wrapping_add(e as u64)),
                device,
                model,
            )?;
            Ok(CalibrationSample {
                n: g.n as f64,
                classical_ns: g.classical_ns,
                model_depth: g.model_depth,
                quantum_ns: g.shot_ns,
            })
        })
        .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum CalibrationError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Cost(#[from] CostError),
}

/// Fits cost constants on simulator runs at `2^lo ..= 2^hi` rows.
pub fn calibrate_on_simulator(
    lo: u32,
    hi: u32,
    device: &DeviceModel,
    model: &DepthModel,
    seed: u64,
) -> Result<Calibration, CalibrationError> {
    Ok(calibrate(&grover_samples(lo, hi, device, model, seed)?)?)
}
