use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::depth::{project_quantum_cost, DepthModel, ProjectionInput, QuantumConstants};
use super::{classical_cost, expected_runtime, ClassicalConstants, ClassicalOp, CostError, OpKind};

/// Expected match count as a function of N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MRule {
    Fixed(f64),
    Fraction(f64),
}

impl MRule {
    pub fn m(&self, n: f64) -> f64 {
        match *self {
            MRule::Fixed(m) => m.min(n).max(1.0),
            MRule::Fraction(s) => (s * n).max(1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CrossoverConfig {
    pub kind: OpKind,
    pub m_rule: MRule,
    pub log2_n_min: u32,
    pub log2_n_max: u32,
    /// Value width, vector dimension, ε, conjuncts and shots; `n`, `m` and `n_inner` are swept.
    pub b: u32,
    pub d: usize,
    pub eps: f64,
    pub conjuncts: usize,
    pub prefix_bits: u32,
    pub shots: usize,
    pub depth: DepthModel,
    pub quantum: QuantumConstants,
    pub classical: ClassicalConstants,
    /// QROM load time per bit; `None` leaves data transfer out of T_q.
    pub t_load_ns: Option<f64>,
}

impl Default for CrossoverConfig {
    fn default() -> Self {
        Self {
            kind: OpKind::EqualityFilter,
            m_rule: MRule::Fixed(1.0),
            log2_n_min: 4,
            log2_n_max: 40,
            b: 16,
            d: 8,
            eps: 0.01,
            conjuncts: 1,
            prefix_bits: 0,
            shots: 1,
            depth: DepthModel::default(),
            quantum: QuantumConstants {
                layer_ns: 60.0,
                shot_overhead_ns: 1000.0,
                layer_error: 0.0,
                t2_eff_ns: f64::INFINITY,
            },
            classical: ClassicalConstants::default(),
            t_load_ns: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossoverRow {
    pub n: f64,
    pub classical_ns: f64,
    pub quantum_ns: f64,
    pub p_q: f64,
    pub quantum_expected_ns: f64,
    pub quantum_chosen: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossoverReport {
    pub kind: OpKind,
    pub rows: Vec<CrossoverRow>,
    /// Smallest swept N from which quantum wins at every larger swept N.
    pub n_star: Option<f64>,
}

impl CrossoverReport {
    pub fn require_n_star(&self) -> Result<f64, CostError> {
        self.n_star.ok_or(CostError::NoCrossover)
    }
}

fn classical_for(kind: OpKind, n: f64, c: &ClassicalConstants) -> f64 {
    match kind {
        OpKind::EquiJoin | OpKind::NonEquiJoin | OpKind::SimilarityJoin => {
            classical_cost(ClassicalOp::Join { n1: n, n2: n }, c)
        }
        _ => classical_cost(ClassicalOp::Scan { n }, c),
    }
}

/// Sweeps N over powers of two and compares E[T] of the quantum realization
/// with the classical baseline. Joins use equal-sized inputs.
pub fn crossover_analysis(cfg: &CrossoverConfig) -> Result<CrossoverReport, CostError> {
    let mut rows = Vec::new();
    for e in cfg.log2_n_min..=cfg.log2_n_max {
        let n = 2f64.powi(e as i32);
        let input = ProjectionInput {
            n,
            m: cfg.m_rule.m(n),
            n_inner: n,
            b: cfg.b,
            d: cfg.d,
            eps: cfg.eps,
            conjuncts: cfg.conjuncts,
            prefix_bits: cfg.prefix_bits,
            shots: cfg.shots,
        };
        let proj = project_quantum_cost(cfg.kind, &input, &cfg.depth, &cfg.quantum)?;
        let transfer = cfg.t_load_ns.map_or(0.0, |t| n * cfg.b as f64 * t);
        let t_q = proj.t_q_ns + transfer;
        let t_c = classical_for(cfg.kind, n, &cfg.classical);
        rows.push(CrossoverRow {
            n,
            classical_ns: t_c,
            quantum_ns: t_q,
            p_q: proj.p_q,
            quantum_expected_ns: expected_runtime(proj.p_q, t_q, t_c),
            // E_q < T_c ⇔ P_q·(T_q − T_c) < 0, decided without rounding in E_q.
            quantum_chosen: proj.p_q > 0.0 && t_q < t_c,
        });
    }
    let mut n_star = None;
    for r in rows.iter().rev() {
        if !r.quantum_chosen {
            break;
        }
        n_star = Some(r.n);
    }
    Ok(CrossoverReport {
        kind: cfg.kind,
        rows,
        n_star,
    })
}

pub fn crossover_csv(report: &CrossoverReport) -> String {
    let mut s = String::from("N,classical_ns,quantum_expected_ns,chosen\n");
    for r in &report.rows {
        let chosen = if r.quantum_chosen {
            "quantum"
        } else {
            "classical"
        };
        let _ = writeln!(
            s,
            "{},{:.6e},{:.6e},{}",
            r.n, r.classical_ns, r.quantum_expected_ns, chosen
        );
    }
    s
}

/// One measured run at size `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationSample {
    pub n: f64,
    /// Measured classical scan time.
    pub classical_ns: f64,
    /// Symbolic depth of the quantum realization at this size.
    pub model_depth: f64,
    /// Measured per-shot device time of the quantum realization.
    pub quantum_ns: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub c_tuple_ns: f64,
    pub layer_ns: f64,
    pub shot_overhead_ns: f64,
    pub max_rel_error_classical: f64,
    pub max_rel_error_quantum: f64,
}

impl Calibration {
    pub fn classical(&self) -> ClassicalConstants {
        ClassicalConstants {
            c_tuple_ns: self.c_tuple_ns,
        }
    }

    pub fn apply(&self, constants: &QuantumConstants) -> QuantumConstants {
        QuantumConstants {
            layer_ns: self.layer_ns,
            shot_overhead_ns: self.shot_overhead_ns,
            ..*constants
        }
    }
}

/// Fits c_tuple through the origin on classical times and (layer time,
/// per-shot overhead) by least squares on quantum times.
pub fn calibrate(samples: &[CalibrationSample]) -> Result<Calibration, CostError> {
    let k = samples.len() as f64;
    let distinct = samples
        .windows(2)
        .any(|w| w[0].model_depth != w[1].model_depth);
    if samples.len() < 2 || !distinct {
        return Err(CostError::Underdetermined);
    }
    let c_tuple_ns = samples.iter().map(|s| s.n * s.classical_ns).sum::<f64>()
        / samples.iter().map(|s| s.n * s.n).sum::<f64>();
    let mx = samples.iter().map(|s| s.model_depth).sum::<f64>() / k;
    let my = samples.iter().map(|s| s.quantum_ns).sum::<f64>() / k;
    let sxy: f64 = samples
        .iter()
        .map(|s| (s.model_depth - mx) * (s.quantum_ns - my))
        .sum();
    let sxx: f64 = samples.iter().map(|s| (s.model_depth - mx).powi(2)).sum();
    let layer_ns = sxy / sxx;
    let shot_overhead_ns = my - layer_ns * mx;
    let rel = |pred: f64, obs: f64| ((pred - obs) / obs).abs();
    let max_rel_error_classical = samples
        .iter()
        .map(|s| rel(c_tuple_ns * s.n, s.classical_ns))
        .fold(0.0, f64::max);
    let max_rel_error_quantum = samples
        .iter()
        .map(|s| rel(layer_ns * s.model_depth + shot_overhead_ns, s.quantum_ns))
        .fold(0.0, f64::max);
    Ok(Calibration {
        c_tuple_ns,
        layer_ns,
        shot_overhead_ns,
        max_rel_error_classical,
        max_rel_error_quantum,
    })
}
