use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::estimation::{counting_phase_bits, quantum_count};
use super::oracle::{compile_oracle, CodePred, PredicateOracle, QromLoader};
use super::{diffusion_gates, grover_iterations, CircuitError};
use crate::sim::{sample, Circuit, Gate, NoiseModel};

#[derive(Debug, Clone, PartialEq)]
pub struct GroverRun {
    pub k: usize,
    pub shots: usize,
    /// Measured RID → occurrences.
    pub raw_hits: BTreeMap<u64, usize>,
    /// Fraction of shots that landed on a truly marked RID.
    pub success_estimate: f64,
    /// Marked-count figure `k` was derived from.
    pub m_used: usize,
}

impl GroverRun {
    /// Distinct measured RIDs that satisfy the oracle's predicate.
    pub fn verified(&self, oracle: &PredicateOracle) -> Vec<usize> {
        self.raw_hits
            .keys()
            .map(|&r| r as usize)
            .filter(|&r| oracle.is_marked(r))
            .collect()
    }
}

/// sin²((2k+1)θ) with θ = asin√(M/N).
pub fn success_probability(n: usize, m: usize, k: usize) -> f64 {
    let theta = (m as f64 / n as f64).sqrt().asin();
    ((2 * k + 1) as f64 * theta).sin().powi(2)
}

/// |s⟩ on the RID register followed by `k` rounds of oracle and diffusion;
/// measures the RID register.
pub fn build_grover_circuit(oracle: &PredicateOracle, k: usize) -> Circuit {
    let rid = oracle.layout.rid.clone();
    let mut c = Circuit::new(oracle.n_qubits()).with_measured(rid.clone());
    c.extend(rid.iter().map(|&q| Gate::h(q)));
    let diff = diffusion_gates(&rid);
    for _ in 0..k {
        c.extend(oracle.circuit.gates.iter().cloned());
        c.extend(diff.iter().cloned());
    }
    c
}

/// Runs Grover search with `k = grover_iterations(N, M)`. When `m_est` is
/// absent the marked count is first estimated by quantum counting.
pub fn grover_filter(
    oracle: &PredicateOracle,
    m_est: Option<usize>,
    shots: usize,
    noise: &NoiseModel,
) -> Result<GroverRun, CircuitError> {
    let n_dom = 1usize << oracle.n();
    let m = match m_est {
        Some(m) => m,
        None => quantum_count(oracle, counting_phase_bits(oracle.n()), shots, noise.seed)?,
    };
    if m == 0 {
        return Err(CircuitError::ZeroMatches);
    }
    let m = m.min(n_dom);
    let k = grover_iterations(n_dom, m)?;
    let mut run = grover_with_k(oracle, k, shots, noise)?;
    run.m_used = m;
    Ok(run)
}

/// One Grover sampling batch with a fixed iteration count.
pub fn grover_with_k(
    oracle: &PredicateOracle,
    k: usize,
    shots: usize,
    noise: &NoiseModel,
) -> Result<GroverRun, CircuitError> {
    let c = build_grover_circuit(oracle, k);
    let r = sample(&c, shots, noise)?;
    let good: usize = r
        .counts
        .iter()
        .filter(|(&x, _)| oracle.is_marked(x as usize))
        .map(|(_, &c)| c)
        .sum();
    Ok(GroverRun {
        k,
        shots,
        success_estimate: good as f64 / shots as f64,
        raw_hits: r.counts,
        m_used: 0,
    })
}

/// Inner RIDs matching one outer key: a single Grover filter over the inner
/// table's RID space (the oracle is `inner.key = outer_key`), deduplicated and
/// rechecked. An absent key yields the empty set.
pub fn equijoin_probe(
    inner_oracle: &PredicateOracle,
    shots: usize,
    noise: &NoiseModel,
) -> Result<Vec<usize>, CircuitError> {
    match grover_filter(inner_oracle, inner_oracle.marked_count_hint, shots, noise) {
        Ok(run) => Ok(run.verified(inner_oracle)),
        Err(CircuitError::ZeroMatches) => Ok(Vec::new()),
        Err(e) => Err(e),
    }
}

/// Up to `rows` distinct RIDs drawn from the rows satisfying `pred`, collected
/// by Grover sampling rounds that exclude RIDs already drawn.
pub fn grover_sample(
    loader: &QromLoader,
    pred: &CodePred,
    rows: usize,
    shots: usize,
    noise: &NoiseModel,
) -> Result<Vec<usize>, CircuitError> {
    let mut loader = loader.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let mut picked: Vec<usize> = Vec::new();
    let mut round = 0u64;
    while picked.len() < rows && round < 16 {
        let oracle = compile_oracle(pred, &loader)?;
        let run = match grover_filter(
            &oracle,
            None,
            shots,
            &noise.with_seed(noise.seed.wrapping_add(round)),
        ) {
            Ok(r) => r,
            Err(CircuitError::ZeroMatches) => break,
            Err(e) => return Err(e),
        };
        let mut fresh = run.verified(&oracle);
        fresh.shuffle(&mut rng);
        fresh.truncate(rows - picked.len());
        loader.exclude(fresh.iter().copied());
        picked.extend(fresh);
        round += 1;
    }
    Ok(picked)
}
