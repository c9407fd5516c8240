use std::collections::BTreeMap;

use proptest::prelude::*;

use super::*;
use crate::sim::{schedule_layers, Circuit, DeviceModel, Gate};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn device(durations: &[(&str, f64)], errors: &[(&str, f64)], t2: f64) -> DeviceModel {
    let map = |v: &[(&str, f64)]| {
        v.iter()
            .map(|(k, x)| (k.to_string(), *x))
            .collect::<BTreeMap<_, _>>()
    };
    DeviceModel {
        gate_durations_ns: map(durations),
        gate_errors: map(errors),
        t_ctrl_ns: 10.0,
        t2_eff_ns: t2,
        ..DeviceModel::default()
    }
}

#[test]
fn time_goldens() {
    let dev = device(&[("H", 40.0), ("X", 30.0)], &[], 1e9);
    let mut c = Circuit::new(1);
    c.push(Gate::h(0)).push(Gate::x(0));
    assert!(rel(circuit_time(&c, &dev).unwrap(), 90.0) < 1e-12);
    assert_eq!(circuit_time(&Circuit::new(2), &dev).unwrap(), 0.0);
    let dev = device(&[("H", 20.0)], &[], 1e9);
    let mut c = Circuit::new(1);
    c.push(Gate::h(0));
    assert!(rel(circuit_time(&c, &dev).unwrap(), 30.0) < 1e-12);
}

#[test]
fn unknown_gate_duration_is_reported() {
    let dev = device(&[("H", 20.0)], &[], 1e9);
    let mut c = Circuit::new(2);
    c.push(Gate::cnot(0, 1));
    assert!(matches!(
        circuit_time(&c, &dev),
        Err(CostError::UnknownGateDuration(_))
    ));
}

#[test]
fn success_goldens() {
    let p = layer_success(&[0.001, 0.001], 50.0, 100_000.0).unwrap();
    assert!(rel(p, 0.998 * (-0.0005f64).exp()) < 1e-12);
    assert!((p - 0.99750).abs() < 1e-5);
    let dev = device(&[("H", 50.0)], &[("H", 0.001)], 100_000.0);
    let mut c = Circuit::new(2);
    c.push(Gate::h(0)).push(Gate::h(1));
    let s = schedule_layers(&c, &dev).unwrap();
    assert!(rel(estimate_success(&c, &s, &dev).unwrap(), p) < 1e-12);
    c.push(Gate::h(0)).push(Gate::h(1));
    let s = schedule_layers(&c, &dev).unwrap();
    assert!(rel(estimate_success(&c, &s, &dev).unwrap(), p * p) < 1e-12);
    let quiet = device(&[("H", 50.0)], &[], f64::INFINITY);
    assert_eq!(estimate_success(&c, &s, &quiet).unwrap(), 1.0);
}

#[test]
fn layer_error_overflow_names_the_layer() {
    let dev = device(&[("H", 50.0)], &[("H", 0.6)], 1e9);
    let mut c = Circuit::new(2);
    c.push(Gate::h(0)).push(Gate::h(0)).push(Gate::h(1));
    let s = schedule_layers(&c, &dev).unwrap();
    assert!(matches!(
        estimate_success(&c, &s, &dev),
        Err(CostError::LayerErrorOverflow { layer: 0, .. })
    ));
}

#[test]
fn expected_runtime_goldens() {
    assert!(rel(expected_runtime(0.9, 1e6, 1e7), 1.9e6) < 1e-12);
    assert_eq!(expected_runtime(1.0, 123.0, 1e9), 123.0);
    assert!(rel(expected_runtime(1e-15, 1.0, 1e7), 1e7) < 1e-12);
}

#[test]
fn classical_cost_goldens() {
    let c = ClassicalConstants { c_tuple_ns: 100.0 };
    assert_eq!(classical_cost(ClassicalOp::Scan { n: 1000.0 }, &c), 1e5);
    assert_eq!(classical_cost(ClassicalOp::Scan { n: 0.0 }, &c), 0.0);
    assert_eq!(
        classical_cost(
            ClassicalOp::Join {
                n1: 100.0,
                n2: 100.0
            },
            &ClassicalConstants { c_tuple_ns: 1.0 }
        ),
        1e4
    );
}

#[test]
fn depth_formulas() {
    let m = DepthModel::default();
    let base = ProjectionInput {
        n: 1024.0,
        m: 4.0,
        n_inner: 1024.0,
        b: 8,
        d: 8,
        eps: 0.01,
        conjuncts: 1,
        prefix_bits: 0,
        shots: 1,
    };
    let (d, calls) = m.depth(OpKind::EqualityFilter, &base);
    assert!(rel(d, (m.d_orc(10.0, 1) + m.d_diff(10.0)) * 16.0) < 1e-12);
    assert_eq!(calls, 1.0);
    let (d, _) = m.depth(OpKind::Count, &base);
    assert!(rel(d, (m.d_orc(10.0, 1) + m.d_diff(10.0)) * 100.0) < 1e-12);
    let (d, calls) = m.depth(OpKind::SimilarityJoin, &base);
    assert!(rel(d, 2.0 * m.d_prep(8) + 3.0) < 1e-12);
    assert_eq!(calls, 1024.0 * 1024.0);
    assert_eq!(m.q_eps(std::f64::consts::PI / 64.0), 6);
}

#[test]
fn projection_multiplies_depth_by_layer_time() {
    let k = QuantumConstants {
        layer_ns: 50.0,
        shot_overhead_ns: 1000.0,
        layer_error: 0.0,
        t2_eff_ns: f64::INFINITY,
    };
    let input = ProjectionInput {
        n: 256.0,
        m: 1.0,
        shots: 10,
        conjuncts: 1,
        ..Default::default()
    };
    let p =
        project_quantum_cost(OpKind::EqualityFilter, &input, &DepthModel::default(), &k).unwrap();
    assert!(rel(p.t_q_ns, 10.0 * (p.depth * 50.0 + 1000.0)) < 1e-12);
    assert_eq!(p.p_q, 1.0);
    assert!(OpKind::parse("teleport").is_err());
    for kind in OpKind::ALL {
        assert_eq!(OpKind::parse(&format!("{kind:?}")).unwrap(), kind);
    }
}

fn pure_power_law(c_q: f64, c_c: f64) -> CrossoverConfig {
    CrossoverConfig {
        m_rule: MRule::Fixed(1.0),
        log2_n_min: 0,
        log2_n_max: 40,
        depth: DepthModel {
            orc: 0.0,
            diff_slope: 0.0,
            diff_const: 1.0,
            ..DepthModel::default()
        },
        quantum: QuantumConstants {
            layer_ns: c_q,
            shot_overhead_ns: 0.0,
            layer_error: 0.0,
            t2_eff_ns: f64::INFINITY,
        },
        classical: ClassicalConstants { c_tuple_ns: c_c },
        ..CrossoverConfig::default()
    }
}

#[test]
fn crossover_examples() {
    let r = crossover_analysis(&pure_power_law(1.0, 1.0)).unwrap();
    assert_eq!(r.n_star, Some(2.0));
    let r = crossover_analysis(&pure_power_law(2f64.powi(15), 1.0)).unwrap();
    assert_eq!(
        r.n_star,
        Some(2f64.powi(31)),
        "ties at N = 2^30 stay classical"
    );
    let r = crossover_analysis(&pure_power_law(f64::INFINITY, 1.0)).unwrap();
    assert_eq!(r.require_n_star(), Err(CostError::NoCrossover));
    let csv = crossover_csv(&r);
    assert!(csv.starts_with("N,classical_ns,quantum_expected_ns,chosen\n"));
    assert_eq!(csv.lines().count(), 42);
}

#[test]
fn calibration_recovers_linear_constants() {
    let samples: Vec<CalibrationSample> = (4..=10)
        .map(|e| {
            let n = 2f64.powi(e);
            let depth = 3.0 * n.sqrt();
            CalibrationSample {
                n,
                classical_ns: 80.0 * n,
                model_depth: depth,
                quantum_ns: 55.0 * depth + 900.0,
            }
        })
        .collect();
    let cal = calibrate(&samples).unwrap();
    assert!(rel(cal.c_tuple_ns, 80.0) < 1e-9);
    assert!(rel(cal.layer_ns, 55.0) < 1e-9);
    assert!(rel(cal.shot_overhead_ns, 900.0) < 1e-9);
    assert!(cal.max_rel_error_quantum < 1e-9);
    assert_eq!(calibrate(&samples[..1]), Err(CostError::Underdetermined));
}

#[test]
fn adaptation_examples() {
    let fb = |obs: f64, pred: f64| Feedback {
        observed_success: obs,
        predicted_success: pred,
        elapsed_ns: 0.0,
        quality_ok: true,
    };
    let mut s = AdaptState::new(100, 12, None);
    assert_eq!(
        adapt(&mut s, &fb(0.1, 0.8)),
        AdaptationAction::IncreaseShots { shots: 200 }
    );
    assert_eq!(adapt(&mut s, &fb(0.9, 0.8)), AdaptationAction::None);
    let mut s = AdaptState {
        shots: 800,
        ..AdaptState::new(100, 0, None)
    };
    assert_eq!(adapt(&mut s, &fb(0.1, 0.8)), AdaptationAction::Fallback);
    let mut s = AdaptState::new(100, 12, Some(10.0));
    assert_eq!(
        adapt(
            &mut s,
            &Feedback {
                elapsed_ns: 11.0,
                ..fb(0.9, 0.8)
            }
        ),
        AdaptationAction::Fallback
    );
}

#[test]
fn adaptation_ladder() {
    let mut s = AdaptState::new(10, 8, None);
    let bad = Feedback {
        observed_success: 0.0,
        predicted_success: 1.0,
        elapsed_ns: 0.0,
        quality_ok: false,
    };
    let seq: Vec<_> = (0..5).map(|_| adapt(&mut s, &bad)).collect();
    assert_eq!(
        seq,
        vec![
            AdaptationAction::IncreaseShots { shots: 20 },
            AdaptationAction::IncreaseShots { shots: 40 },
            AdaptationAction::IncreaseShots { shots: 80 },
            AdaptationAction::SwitchVariant {
                iterations: 4,
                shots: 80
            },
            AdaptationAction::Fallback,
        ]
    );
}

fn random_circuit(n: usize, ops: &[(u8, usize, usize)]) -> Circuit {
    let mut c = Circuit::new(n);
    for &(kind, a, b) in ops {
        let (a, b) = (a % n, b % n);
        match kind % 3 {
            0 => c.push(Gate::h(a)),
            1 => c.push(Gate::x(a)),
            _ if a != b => c.push(Gate::cnot(a, b)),
            _ => c.push(Gate::z(a)),
        };
    }
    c
}

fn noisy() -> DeviceModel {
    device(
        &[("H", 20.0), ("X", 20.0), ("Z", 20.0), ("CNOT", 40.0)],
        &[("H", 1e-3), ("X", 1e-3), ("Z", 1e-3), ("CNOT", 1e-2)],
        1e5,
    )
}

proptest! {
    #[test]
    fn time_is_additive_over_concatenation(
        a in prop::collection::vec((0u8..3, 0usize..4, 0usize..4), 0..20),
        b in prop::collection::vec((0u8..3, 0usize..4, 0usize..4), 0..20),
    ) {
        let dev = noisy();
        let (ca, cb) = (random_circuit(4, &a), random_circuit(4, &b));
        let (sa, sb) = (schedule_layers(&ca, &dev).unwrap(), schedule_layers(&cb, &dev).unwrap());
        let joined = sa.concat(&sb, ca.len());
        let sum = estimate_time(&sa, &dev) + estimate_time(&sb, &dev);
        prop_assert!((estimate_time(&joined, &dev) - sum).abs() <= 1e-9 * sum.max(1.0));
    }

    #[test]
    fn success_is_bounded_and_non_increasing(ops in prop::collection::vec((0u8..3, 0usize..4, 0usize..4), 1..30)) {
        let dev = noisy();
        let mut prev = 1.0;
        for k in 1..=ops.len() {
            let c = random_circuit(4, &ops[..k]);
            let s = schedule_layers(&c, &dev).unwrap();
            let p = estimate_success(&c, &s, &dev).unwrap();
            prop_assert!(p > 0.0 && p <= 1.0);
            prop_assert!(p <= prev + 1e-15);
            prev = p;
        }
    }

    #[test]
    fn expected_runtime_interpolates(p in 0.0f64..=1.0, tq in 1.0f64..1e9, tc in 1.0f64..1e9) {
        let e = expected_runtime(p, tq, tc);
        prop_assert!(e >= tq.min(tc) * (1.0 - 1e-12) && e <= tq.max(tc) * (1.0 + 1e-12));
    }

    #[test]
    fn adaptation_terminates_within_five_steps(
        shots in 1usize..5000,
        iterations in 0usize..64,
        outcomes in prop::collection::vec(0.0f64..1.0, 5),
    ) {
        let mut s = AdaptState::new(shots, iterations, None);
        let mut done = false;
        for obs in outcomes {
            let fb = Feedback { observed_success: obs * 0.4, predicted_success: 1.0, elapsed_ns: 0.0, quality_ok: false };
            let a = adapt(&mut s, &fb);
            prop_assert!(s.shots <= 8 * shots);
            if a == AdaptationAction::Fallback {
                done = true;
                break;
            }
        }
        prop_assert!(done);
    }

    #[test]
    fn depth_terms_are_monotone(n in 1.0f64..40.0, b in 1u32..32, d in 1usize..64) {
        let m = DepthModel::default();
        prop_assert!(m.d_orc(n + 1.0, 1) >= m.d_orc(n, 1));
        prop_assert!(m.d_diff(n + 1.0) >= m.d_diff(n));
        prop_assert!(m.d_cmp(b + 1) >= m.d_cmp(b));
        prop_assert!(m.d_prep(d + 1) >= m.d_prep(d));
        prop_assert!(m.d_load(b + 1) >= m.d_load(b) && m.d_key(b + 1) >= m.d_key(b) && m.d_idx(n + 1.0) >= m.d_idx(n));
    }

    #[test]
    fn power_law_crossover_is_monotone(log_cq in 0i32..20) {
        let r = crossover_analysis(&pure_power_law(2f64.powi(log_cq), 1.0)).unwrap();
        let first = r.rows.iter().position(|row| row.quantum_chosen);
        if let Some(i) = first {
            prop_assert!(r.rows[i..].iter().all(|row| row.quantum_chosen));
            prop_assert_eq!(r.n_star, Some(r.rows[i].n));
        }
    }
}
