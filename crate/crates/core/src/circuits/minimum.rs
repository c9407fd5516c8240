use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::estimation::{counting_phase_bits, quantum_count};
use super::grover::build_grover_circuit;
use super::oracle::{compile_oracle, CodePred, PredicateOracle, QromLoader};
use super::{diffusion_gates, grover_iterations, CircuitError};
use crate::sim::{sample, Gate, NoiseModel, QuantumState, Sampler, SparseState};

/// Growth factor of the randomized iteration schedule.
const LAMBDA: f64 = 6.0 / 5.0;
const REPETITIONS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct MinResult {
    pub min_rid: usize,
    pub min_value: u64,
    /// Every incumbent held, in order, across all repetitions.
    pub trail: Vec<(usize, u64)>,
    pub grover_iterations: usize,
    /// True when counting found no improver for the returned incumbent.
    pub certified: bool,
}

/// Single-shot Grover measurements for one oracle, reusing G^j|s⟩ across draws.
struct ShotSource<'a> {
    oracle: &'a PredicateOracle,
    states: Vec<SparseState>,
    noise: Option<&'a NoiseModel>,
}

impl<'a> ShotSource<'a> {
    fn new(
        oracle: &'a PredicateOracle,
        noise: Option<&'a NoiseModel>,
    ) -> Result<Self, CircuitError> {
        let mut s = SparseState::zero(oracle.n_qubits())?;
        for &q in &oracle.layout.rid {
            s.apply(&Gate::h(q));
        }
        Ok(Self {
            oracle,
            states: vec![s],
            noise,
        })
    }

    fn draw(&mut self, k: usize, rng: &mut ChaCha8Rng) -> Result<usize, CircuitError> {
        if let Some(noise) = self.noise.filter(|n| n.enabled) {
            let c = build_grover_circuit(self.oracle, k);
            let r = sample(&c, 1, &noise.with_seed(rng.gen()))?;
            return Ok(*r.counts.keys().next().expect("one shot") as usize);
        }
        let diff = diffusion_gates(&self.oracle.layout.rid);
        while self.states.len() <= k {
            let mut s = self.states.last().expect("initial state").clone();
            for g in self.oracle.circuit.gates.iter().chain(&diff) {
                s.apply(g);
            }
            self.states.push(s);
        }
        let dist = self.states[k].marginal(&self.oracle.layout.rid);
        Ok(Sampler::new(&dist).draw(rng) as usize)
    }
}

/// One threshold-search run. Returns `None` when no row satisfies `filter`.
///
/// The incumbent starts as a Grover-sampled row satisfying `filter`; each step
/// marks rows with `filter ∧ v < v(incumbent)`, stops once counting reports no
/// improver or the cumulative iteration budget ⌈22.5·√N⌉ is spent.
pub fn durr_hoyer_run(
    loader: &QromLoader,
    filter: &CodePred,
    value_col: usize,
    rng: &mut ChaCha8Rng,
    noise: Option<&NoiseModel>,
) -> Result<Option<MinResult>, CircuitError> {
    let n_dom = loader.domain();
    let budget = (22.5 * (n_dom as f64).sqrt()).ceil() as usize;
    let values = &loader.columns[value_col].values;
    let mut used = 0usize;
    let mut incumbent: Option<usize> = None;
    let mut trail = Vec::new();
    let phase_bits = counting_phase_bits(loader.n);
    loop {
        let pred = match incumbent {
            None => filter.clone(),
            Some(y) if values[y] == 0 => return Ok(Some(finish(y, values, trail, used, true))),
            Some(y) => CodePred::And(vec![
                filter.clone(),
                CodePred::Interval {
                    col: value_col,
                    lo: 0,
                    hi: values[y] - 1,
                },
            ]),
        };
        let oracle = compile_oracle(&pred, loader)?;
        let m_hat = quantum_count(&oracle, phase_bits, 256, rng.gen())?;
        if m_hat == 0 {
            return Ok(incumbent.map(|y| finish(y, values, trail, used, true)));
        }
        let mut source = ShotSource::new(&oracle, noise)?;
        let mut m = 1.0f64;
        let mut first = true;
        let improved = loop {
            if used >= budget {
                break None;
            }
            let k = if first {
                grover_iterations(n_dom, m_hat.min(n_dom))?
            } else {
                rng.gen_range(0..m.ceil() as usize)
            };
            first = false;
            used += k;
            let x = source.draw(k, rng)?;
            if oracle.is_marked(x) {
                break Some(x);
            }
            m = (m * LAMBDA).min((n_dom as f64).sqrt());
        };
        match improved {
            Some(x) => {
                incumbent = Some(x);
                trail.push((x, values[x]));
            }
            None => return Ok(incumbent.map(|y| finish(y, values, trail, used, false))),
        }
    }
}

fn finish(
    y: usize,
    values: &[u64],
    trail: Vec<(usize, u64)>,
    used: usize,
    certified: bool,
) -> MinResult {
    MinResult {
        min_rid: y,
        min_value: values[y],
        trail,
        grover_iterations: used,
        certified,
    }
}

/// Minimum of `values` (N a power of two, `bits`-bit entries) by three
/// independent threshold-search runs, keeping the best incumbent.
pub fn durr_hoyer_min(
    values: &[u64],
    bits: u32,
    seed: u64,
    noise: Option<&NoiseModel>,
) -> Result<MinResult, CircuitError> {
    super::log2_exact(values.len())?;
    let mut loader = QromLoader::new(values.len(), None)?;
    let col = loader.add_column("v", bits, values.to_vec())?;
    durr_hoyer_over(&loader, &CodePred::Const(true), col, seed, noise)?
        .ok_or(CircuitError::ZeroMatches)
}

/// Best of three runs over the rows of `loader` satisfying `filter`.
pub fn durr_hoyer_over(
    loader: &QromLoader,
    filter: &CodePred,
    value_col: usize,
    seed: u64,
    noise: Option<&NoiseModel>,
) -> Result<Option<MinResult>, CircuitError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<MinResult> = None;
    let mut trail = Vec::new();
    let mut iterations = 0;
    for _ in 0..REPETITIONS {
        let Some(r) = durr_hoyer_run(loader, filter, value_col, &mut rng, noise)? else {
            return Ok(None);
        };
        trail.extend(r.trail.iter().copied());
        iterations += r.grover_iterations;
        if best.as_ref().is_none_or(|b| {
            r.min_value < b.min_value || (r.min_value == b.min_value && r.certified && !b.certified)
        }) {
            best = Some(r);
        }
    }
    Ok(best.map(|b| MinResult {
        trail,
        grover_iterations: iterations,
        ..b
    }))
}
