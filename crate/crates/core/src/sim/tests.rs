use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn close(a: C64, b: C64) -> bool {
    (a - b).norm() < 1e-9
}

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let mut amps: Vec<C64> = (0..1 << n)
        .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    StateVector::from_amplitudes(amps).unwrap()
}

fn random_gate(n: usize, rng: &mut ChaCha8Rng) -> Gate {
    let mut qubits: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        qubits.swap(i, rng.gen_range(0..=i));
    }
    let theta = rng.gen_range(-PI..PI);
    let t = qubits[0];
    let ctrl = |k: usize, rng: &mut ChaCha8Rng| -> Vec<Control> {
        qubits[2..2 + k]
            .iter()
            .map(|&q| Control {
                qubit: q,
                polarity: rng.gen(),
            })
            .collect()
    };
    match rng.gen_range(0..12) {
        0 => Gate::h(t),
        1 => Gate::x(t),
        2 => Gate::z(t),
        3 => Gate::rx(t, theta),
        4 => Gate::ry(t, theta),
        5 => Gate::rz(t, theta),
        6 => Gate::cnot(qubits[1], t),
        7 => Gate::cz(qubits[1], t),
        8 => Gate::swap(t, qubits[1]),
        9 => Gate::cswap(qubits[2], t, qubits[1]),
        10 => Gate::mcx(&ctrl(2, rng), t),
        _ => Gate::ry(t, theta).controlled_by(&ctrl(2, rng)),
    }
}

#[test]
fn hadamard_on_zero() {
    let mut c = Circuit::new(1);
    c.push(Gate::h(0));
    let sv = run_statevector(&c).unwrap();
    assert!(close(sv.amplitudes()[0], C64::new(FRAC_1_SQRT_2, 0.0)));
    assert!(close(sv.amplitudes()[1], C64::new(FRAC_1_SQRT_2, 0.0)));
}

#[test]
fn cnot_flips_target_when_control_set() {
    // |10⟩: qubit 1 set.
    let mut c = Circuit::new(2);
    c.push(Gate::x(1)).push(Gate::cnot(1, 0));
    let sv = run_statevector(&c).unwrap();
    assert!(close(sv.amplitudes()[0b11], C64::new(1.0, 0.0)));
}

#[test]
fn ry_pi_maps_zero_to_one() {
    let mut c = Circuit::new(1);
    c.push(Gate::ry(0, PI));
    let sv = run_statevector(&c).unwrap();
    assert!((sv.amplitudes()[1].norm() - 1.0).abs() < 1e-12);
    assert!(sv.amplitudes()[0].norm() < 1e-12);
}

#[test]
fn empty_and_uniform_circuits() {
    let sv = run_statevector(&Circuit::new(2)).unwrap();
    assert!(close(sv.amplitudes()[0], C64::new(1.0, 0.0)));

    let mut c = Circuit::new(2);
    c.push(Gate::h(0)).push(Gate::h(1));
    let sv = run_statevector(&c).unwrap();
    for a in sv.amplitudes() {
        assert!(close(*a, C64::new(0.5, 0.0)));
    }
}

#[test]
fn bell_state_matches_hand_product() {
    // (CNOT_{0→1})(I⊗H)|00⟩ = (|00⟩ + |11⟩)/√2
    let mut c = Circuit::new(2);
    c.push(Gate::h(0)).push(Gate::cnot(0, 1));
    let sv = run_statevector(&c).unwrap();
    let expect = [FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2];
    for (a, e) in sv.amplitudes().iter().zip(expect) {
        assert!(close(*a, C64::new(e, 0.0)));
    }
}

#[test]
fn capacity_and_operand_errors() {
    assert!(matches!(
        run_statevector(&Circuit::new(25)),
        Err(SimError::CapacityExceeded { .. })
    ));
    let mut c = Circuit::new(2);
    c.push(Gate::h(2));
    assert!(matches!(
        run_statevector(&c),
        Err(SimError::IndexOutOfRange { .. })
    ));
    let mut c = Circuit::new(2);
    c.push(Gate::cz(1, 1));
    assert!(matches!(
        run_statevector(&c),
        Err(SimError::OverlappingOperands { .. })
    ));
}

#[test]
fn bell_sampling_noiseless() {
    let mut c = Circuit::new(2);
    c.push(Gate::h(0)).push(Gate::cnot(0, 1));
    let r = sample(&c, DEFAULT_SHOTS, &NoiseModel::noiseless(11)).unwrap();
    assert_eq!(
        r.counts.keys().copied().collect::<Vec<_>>(),
        vec![0b00, 0b11]
    );
    let sigma = (2000.0f64 * 0.25).sqrt();
    for k in [0b00, 0b11] {
        assert!((r.count(k) as f64 - 1000.0).abs() <= 3.0 * sigma);
    }
    assert_eq!(r.counts.values().sum::<usize>(), 2000);
    assert_eq!(r.bitstring(0b11), "11");
}

#[test]
fn deterministic_basis_state_sampling() {
    let mut c = Circuit::new(1);
    c.push(Gate::x(0));
    let r = sample(&c, 137, &NoiseModel::noiseless(0)).unwrap();
    assert_eq!(r.count(1), 137);
    assert!(matches!(
        sample(&c, 0, &NoiseModel::noiseless(0)),
        Err(SimError::NoShots)
    ));
}

#[test]
fn fixed_seed_gives_identical_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut c = Circuit::new(4);
    for _ in 0..30 {
        c.push(random_gate(4, &mut rng));
    }
    let noise = NoiseModel::from_device(&DeviceModel::default(), 42);
    let a = sample(&c, 500, &noise).unwrap();
    let b = sample(&c, 500, &noise).unwrap();
    assert_eq!(a, b);
    let a = sample_with(&c, 500, &noise, Backend::Sparse).unwrap();
    let b = sample_with(&c, 500, &noise, Backend::Sparse).unwrap();
    assert_eq!(a, b);
}

#[test]
fn trajectory_cap_preserves_distribution() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut c = Circuit::new(4);
    for _ in 0..60 {
        c.push(random_gate(4, &mut rng));
    }
    let mut device = DeviceModel::default();
    for e in device.gate_errors.values_mut() {
        *e = 0.05;
    }
    let shots = 4000;
    let full = sample(
        &c,
        shots,
        &NoiseModel::from_device(&device, 7).with_max_trajectories(usize::MAX),
    )
    .unwrap();
    let capped = sample(
        &c,
        shots,
        &NoiseModel::from_device(&device, 8).with_max_trajectories(64),
    )
    .unwrap();
    assert_eq!(capped.counts.values().sum::<usize>(), shots);
    let tvd: f64 = (0..16u64)
        .map(|x| (full.frequency(x) - capped.frequency(x)).abs())
        .sum::<f64>()
        / 2.0;
    assert!(tvd < 0.08, "total variation {tvd}");
}

#[test]
fn unitarity_spot_check_every_kind() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let table = Arc::new(QromTable {
        address: vec![0, 1],
        data: vec![3, 0, 1, 2],
    });
    let kinds: Vec<Gate> = vec![
        Gate::h(0),
        Gate::x(1),
        Gate::z(2),
        Gate::rx(0, 0.7),
        Gate::ry(1, -1.3),
        Gate::rz(2, 2.1),
        Gate::phase(3, 0.4),
        Gate::cnot(0, 3),
        Gate::cz(1, 2),
        Gate::swap(0, 2),
        Gate::cswap(3, 0, 1),
        Gate::mcx(&[Control::on(0), Control::off(1)], 2),
        Gate::mcz(&[Control::on(0), Control::on(1), Control::off(3)], 2),
        Gate::ry(3, 0.9).controlled_by(&[Control::off(0), Control::on(2)]),
        Gate::qrom(table, vec![2, 3]),
    ];
    for g in &kinds {
        for _ in 0..100 {
            let orig = random_state(4, &mut rng);
            let mut s = orig.clone();
            s.apply_checked(g).unwrap();
            assert!((s.norm_sqr() - 1.0).abs() < 1e-9, "{g} broke the norm");
            s.apply_checked(&g.inverse()).unwrap();
            for (a, b) in s.amplitudes().iter().zip(orig.amplitudes()) {
                assert!(close(*a, *b), "{g} · inverse is not identity");
            }
        }
    }
}

#[test]
fn qrom_equals_its_mcx_expansion() {
    let table = Arc::new(QromTable {
        address: vec![0, 1, 2],
        data: vec![5, 1, 0, 7, 2, 6, 3, 4],
    });
    let mut c = Circuit::new(6);
    for q in 0..3 {
        c.push(Gate::h(q));
    }
    c.push(Gate::qrom(table, vec![3, 4, 5]));
    let native = run_statevector(&c).unwrap();
    let expanded = run_statevector(&c.expand_qrom()).unwrap();
    assert!((native.fidelity(&expanded) - 1.0).abs() < 1e-12);
    for x in 0..8u64 {
        let v = [5u64, 1, 0, 7, 2, 6, 3, 4][x as usize];
        assert!(
            (native.amplitudes()[(x | v << 3) as usize].norm() - 1.0 / 8f64.sqrt()).abs() < 1e-12
        );
    }
}

#[test]
fn pauli_faults_match_gate_semantics() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = random_state(3, &mut rng);
    let mut a = s.clone();
    a.apply_pauli(1, Pauli::Y);
    // Y = i·X·Z
    let mut b = s.clone();
    b.apply(&Gate::z(1));
    b.apply(&Gate::x(1));
    for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
        assert!(close(*x, *y * C64::new(0.0, 1.0)));
    }
}

#[test]
fn qft_matches_dft_matrix() {
    for n in 1..=4usize {
        let dim = 1usize << n;
        let qft = build_qft(n).unwrap();
        for x in 0..dim {
            let mut amps = vec![C64::new(0.0, 0.0); dim];
            amps[x] = C64::new(1.0, 0.0);
            let mut s = StateVector::from_amplitudes(amps).unwrap();
            evolve(&mut s, &qft).unwrap();
            for y in 0..dim {
                let expect = C64::from_polar(
                    1.0 / (dim as f64).sqrt(),
                    2.0 * PI * (x * y) as f64 / dim as f64,
                );
                assert!(close(s.amplitudes()[y], expect), "n={n} x={x} y={y}");
            }
        }
    }
}

#[test]
fn inverse_qft_examples() {
    let c = build_inverse_qft(1).unwrap();
    assert_eq!(c.len(), 1);
    assert_eq!(c.gates[0].name(), "H");

    // Fourier basis state of phase 1/8 on 3 qubits → |001⟩.
    let amps: Vec<C64> = (0..8)
        .map(|y| C64::from_polar(1.0 / 8f64.sqrt(), 2.0 * PI * y as f64 / 8.0))
        .collect();
    let mut s = StateVector::from_amplitudes(amps).unwrap();
    evolve(&mut s, &build_inverse_qft(3).unwrap()).unwrap();
    assert!((s.amplitudes()[1].norm_sqr() - 1.0).abs() < 1e-9);

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let orig = random_state(3, &mut rng);
    let mut s = orig.clone();
    evolve(&mut s, &build_qft(3).unwrap()).unwrap();
    evolve(&mut s, &build_inverse_qft(3).unwrap()).unwrap();
    assert!(s.fidelity(&orig) >= 1.0 - 1e-9);

    assert!(matches!(
        build_inverse_qft(0),
        Err(SimError::CapacityExceeded { .. })
    ));
    assert!(matches!(
        build_inverse_qft(13),
        Err(SimError::CapacityExceeded { .. })
    ));
}

#[test]
fn schedule_examples() {
    let dev = DeviceModel::default();
    let mut c = Circuit::new(2);
    c.push(Gate::h(0)).push(Gate::h(1)).push(Gate::cnot(0, 1));
    let s = schedule_layers(&c, &dev).unwrap();
    assert_eq!(s.layers, vec![vec![0, 1], vec![2]]);
    assert_eq!(s.durations, vec![20.0, 40.0]);

    let mut c = Circuit::new(1);
    c.push(Gate::x(0));
    assert_eq!(schedule_layers(&c, &dev).unwrap().depth(), 1);
    c.push(Gate::x(0));
    assert_eq!(schedule_layers(&c, &dev).unwrap().depth(), 2);

    let mut bare = DeviceModel::default();
    bare.gate_durations_ns.remove("CNOT");
    let mut c = Circuit::new(2);
    c.push(Gate::cnot(0, 1));
    assert!(
        matches!(schedule_layers(&c, &bare), Err(SimError::UnknownGateDuration(k)) if k == "CNOT")
    );
}

#[test]
fn sampling_consistency_with_born_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let shots = 100_000usize;
    for trial in 0..20 {
        let mut c = Circuit::new(4);
        for _ in 0..12 {
            c.push(random_gate(4, &mut rng));
        }
        let probs = run_statevector(&c).unwrap().probabilities();
        let r = sample(&c, shots, &NoiseModel::noiseless(trial)).unwrap();
        for (x, &p) in probs.iter().enumerate() {
            let sigma = (shots as f64 * p * (1.0 - p)).sqrt();
            let got = r.count(x as u64) as f64;
            assert!(
                (got - shots as f64 * p).abs() <= 4.0 * sigma + 1e-9,
                "trial {trial} outcome {x}"
            );
        }
    }
}

#[test]
fn circuit_dump_is_one_gate_per_line() {
    let mut c = Circuit::new(3);
    c.push(Gate::h(0))
        .push(Gate::cnot(0, 1))
        .push(Gate::rz(2, 0.25));
    assert_eq!(c.dump(), "H q0\nCNOT q1 ctrl=q0+\nRZ q2 theta=0.25\n");
}

#[test]
fn noisy_sampling_degrades_only_slightly_on_short_circuits() {
    let mut c = Circuit::new(2);
    c.push(Gate::x(0)).push(Gate::cnot(0, 1));
    let noise = NoiseModel::from_device(&DeviceModel::default(), 77);
    let r = sample(&c, 20_000, &noise).unwrap();
    assert!(r.frequency(0b11) > 0.99);
    assert!(r.frequency(0b11) < 1.0);
}

fn arb_circuit() -> impl Strategy<Value = (u64, usize)> {
    (any::<u64>(), 1usize..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_preserved((seed, len) in arb_circuit()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = Circuit::new(5);
        for _ in 0..len {
            c.push(random_gate(5, &mut rng));
        }
        let sv = run_statevector(&c).unwrap();
        prop_assert!((sv.norm_sqr() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sparse_and_dense_agree((seed, len) in arb_circuit()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = Circuit::new(5);
        for _ in 0..len {
            c.push(random_gate(5, &mut rng));
        }
        let dense = run_statevector(&c).unwrap();
        let sparse = run_sparse(&c).unwrap().to_dense(DEFAULT_QUBIT_CAP).unwrap();
        for (a, b) in dense.amplitudes().iter().zip(sparse.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn layers_are_disjoint_and_topological((seed, len) in arb_circuit()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = Circuit::new(5);
        for _ in 0..len {
            c.push(random_gate(5, &mut rng));
        }
        let s = schedule_layers(&c, &DeviceModel::default()).unwrap();
        let mut layer_of = vec![0usize; c.len()];
        for (k, layer) in s.layers.iter().enumerate() {
            let mut used = std::collections::HashSet::new();
            for &g in layer {
                layer_of[g] = k;
                for q in c.gates[g].operands() {
                    prop_assert!(used.insert(q));
                }
            }
        }
        // every pair of gates sharing a qubit keeps program order
        for i in 0..c.len() {
            for j in i + 1..c.len() {
                let oi = c.gates[i].operands();
                if c.gates[j].operands().iter().any(|q| oi.contains(q)) {
                    prop_assert!(layer_of[i] < layer_of[j]);
                }
            }
        }
        prop_assert_eq!(s.layers.iter().map(Vec::len).sum::<usize>(), c.len());
    }
}
