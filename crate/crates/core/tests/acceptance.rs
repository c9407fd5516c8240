//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use qutedb_core::calibration::calibrate_on_simulator;
use qutedb_core::circuits::{
    aggregate_sum, compile_oracle, durr_hoyer_min, grover_filter, swap_test, swap_test_probability,
    QromLoader,
};
use qutedb_core::index::{
    probe_dimension, select_strategy, DimRange, KeyRange, MultiIndex, Strategy,
};
use qutedb_core::optimizer::{
    crossover_analysis, estimate_success, expected_runtime, layer_success, CrossoverConfig,
    DepthModel, PlanMode,
};
use qutedb_core::sim::{schedule_layers, Gate, QuantumState, SparseState, C64};
use qutedb_core::{
    Bound, Circuit, ColumnDef, ColumnRef, ColumnType, Config, DeviceModel, Engine, NoiseModel,
    Predicate, Realization, Table, Value,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criterion 3 gate on |empirical − analytic| Grover success under the default noisy device.
const NOISY_DEVIATION_GATE: f64 = 0.15;
/// Reference deviation the gate is compared against in the report.
const REFERENCE_DEVIATION: f64 = 0.08;
const SWAP_TOLERANCE: f64 = 0.05;
const EXACT_TOLERANCE: f64 = 1e-9;
const GOLDEN_TOLERANCE: f64 = 1e-12;
const CALIBRATION_TOLERANCE: f64 = 0.20;

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

// ---------------------------------------------------------------------------
// 1. Oracle equivalence

#[derive(Debug, Clone)]
enum P {
    Eq(usize, u64),
    Le(usize, u64),
    Gt(usize, u64),
    Not(Box<P>),
    And(Vec<P>),
    Or(Vec<P>),
}

const COLS: [(&str, u32); 3] = [("x", 3), ("y", 5), ("z", 8)];

fn gen_p(rng: &mut ChaCha8Rng, depth: usize) -> P {
    if depth == 0 || rng.gen_bool(0.35) {
        let c = rng.gen_range(0..COLS.len());
        let v = rng.gen_range(0..1u64 << COLS[c].1);
        return match rng.gen_range(0..3) {
            0 => P::Eq(c, v),
            1 => P::Le(c, v),
            _ => P::Gt(c, v),
        };
    }
    match rng.gen_range(0..3) {
        0 => P::Not(Box::new(gen_p(rng, depth - 1))),
        1 => P::And(
            (0..rng.gen_range(2..=3))
                .map(|_| gen_p(rng, depth - 1))
                .collect(),
        ),
        _ => P::Or(
            (0..rng.gen_range(2..=3))
                .map(|_| gen_p(rng, depth - 1))
                .collect(),
        ),
    }
}

fn holds(p: &P, row: &[u64]) -> bool {
    match p {
        P::Eq(c, v) => row[*c] == *v,
        P::Le(c, v) => row[*c] <= *v,
        P::Gt(c, v) => row[*c] > *v,
        P::Not(q) => !holds(q, row),
        P::And(qs) => qs.iter().all(|q| holds(q, row)),
        P::Or(qs) => qs.iter().any(|q| holds(q, row)),
    }
}

fn to_predicate(p: &P) -> Predicate {
    let col = |c: usize| ColumnRef::bare(COLS[c].0);
    match p {
        P::Eq(c, v) => Predicate::Eq {
            column: col(*c),
            value: Value::UInt(*v),
        },
        P::Le(c, v) => Predicate::Range {
            column: col(*c),
            low: None,
            high: Some(Bound::inclusive(Value::UInt(*v))),
        },
        P::Gt(c, v) => Predicate::Range {
            column: col(*c),
            low: Some(Bound::exclusive(Value::UInt(*v))),
            high: None,
        },
        P::Not(q) => Predicate::Not(Box::new(to_predicate(q))),
        P::And(qs) => Predicate::And(qs.iter().map(to_predicate).collect()),
        P::Or(qs) => Predicate::Or(qs.iter().map(to_predicate).collect()),
    }
}

/// RIDs whose basis state picks up a −1 phase under the oracle circuit.
fn phase_flip_set(circuit: &Circuit, rid_qubits: usize) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for x in 0..1u64 << rid_qubits {
        let mut s = SparseState::from_entries(circuit.n_qubits, vec![(x, C64::new(1.0, 0.0))]);
        for g in &circuit.gates {
            s.apply(g);
        }
        let e = s.sorted();
        if e.len() != 1 || e[0].0 != x {
            return Err(format!("rid {x}: oracle did not restore its ancillas"));
        }
        if e[0].1.re < -0.5 {
            out.push(x as usize);
        }
    }
    Ok(out)
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    for n in [16usize, 64, 256] {
        for q in 0..100 {
            let rows: Vec<Vec<u64>> = (0..n)
                .map(|_| {
                    COLS.iter()
                        .map(|(_, b)| rng.gen_range(0..1u64 << b))
                        .collect()
                })
                .collect();
            let defs = COLS
                .iter()
                .map(|(name, b)| ColumnDef::new(name, ColumnType::UInt { bits: *b as u8 }))
                .collect();
            let mut t = Table::new("t", defs).map_err(|e| e.to_string())?;
            t.insert_rows(
                rows.iter()
                    .map(|r| r.iter().map(|&v| Value::UInt(v)).collect())
                    .collect(),
            )
            .map_err(|e| e.to_string())?;
            let p = gen_p(&mut rng, 3);
            let truth: Vec<usize> = (0..n).filter(|&r| holds(&p, &rows[r])).collect();
            let (loader, code) =
                QromLoader::from_table(&t, &to_predicate(&p)).map_err(|e| e.to_string())?;
            let oracle = compile_oracle(&code, &loader).map_err(|e| e.to_string())?;
            let flipped = phase_flip_set(&oracle.circuit, oracle.n())?;
            if flipped != truth {
                return Err(format!(
                    "N={n} predicate {q} ({p:?}): oracle {flipped:?} vs filter {truth:?}"
                ));
            }
            checked += 1;
        }
    }
    Ok(format!(
        "{checked} predicate/size pairs, phase-flip set == classical filter"
    ))
}

// ---------------------------------------------------------------------------
// 2 and 3. Grover agreement

fn grover_at(
    n: usize,
    m: usize,
    noise: &NoiseModel,
    seed: u64,
) -> Result<(usize, f64, f64, usize), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flags = vec![0u64; n];
    let mut placed = 0;
    while placed < m {
        let r = rng.gen_range(0..n);
        if flags[r] == 0 {
            flags[r] = 1;
            placed += 1;
        }
    }
    let mut t = Table::new("g", vec![ColumnDef::new("f", ColumnType::UInt { bits: 1 })])
        .map_err(|e| e.to_string())?;
    t.insert_rows(flags.iter().map(|&f| vec![Value::UInt(f)]).collect())
        .map_err(|e| e.to_string())?;
    let pred = Predicate::Eq {
        column: ColumnRef::bare("f"),
        value: Value::UInt(1),
    };
    let (loader, code) = QromLoader::from_table(&t, &pred).map_err(|e| e.to_string())?;
    let oracle = compile_oracle(&code, &loader).map_err(|e| e.to_string())?;
    let shots = 2000;
    let run = grover_filter(&oracle, Some(m), shots, noise).map_err(|e| e.to_string())?;
    let k = ((PI / 4.0) * (n as f64 / m as f64).sqrt()).floor().max(1.0) as usize;
    if run.k != k {
        return Err(format!(
            "N={n} M={m}: k={} but floor(π/4·√(N/M))={k}",
            run.k
        ));
    }
    let theta = (m as f64 / n as f64).sqrt().asin();
    let analytic = ((2 * k + 1) as f64 * theta).sin().powi(2);
    Ok((k, analytic, run.success_estimate, shots))
}

fn criterion_2() -> Outcome {
    let (k, analytic, empirical, shots) = grover_at(256, 5, &NoiseModel::noiseless(2), 2)?;
    let sigma = (analytic * (1.0 - analytic) / shots as f64).sqrt();
    let dev = (empirical - analytic).abs();
    let (_, a4, e4, _) = grover_at(4, 1, &NoiseModel::noiseless(3), 3)?;
    check(
        dev <= 3.0 * sigma + 1e-12 && e4 == 1.0 && (a4 - 1.0).abs() < 1e-12,
        format!("N=256 M=5 k={k}: empirical {empirical:.4} vs analytic {analytic:.4} (3σ={:.4}); N=4 M=1 success {e4}", 3.0 * sigma),
    )
}

fn criterion_3() -> Outcome {
    let device = DeviceModel::default();
    let (k, analytic, empirical, _) = grover_at(256, 5, &NoiseModel::from_device(&device, 4), 2)?;
    let dev = (empirical - analytic).abs();
    check(
        dev <= NOISY_DEVIATION_GATE,
        format!(
            "N=256 M=5 k={k} default noisy device: |{empirical:.4} − {analytic:.4}| = {:.1}% (reference ±{:.1}%, gate {:.0}%)",
            100.0 * dev,
            100.0 * REFERENCE_DEVIATION,
            100.0 * NOISY_DEVIATION_GATE
        ),
    )
}

// ---------------------------------------------------------------------------
// 4. SWAP test

fn overlap_sq(x: &[f64], y: &[f64]) -> f64 {
    let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let nx: f64 = x.iter().map(|a| a * a).sum();
    let ny: f64 = y.iter().map(|b| b * b).sum();
    dot * dot / (nx * ny)
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let d = rng.gen_range(1..=16);
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let est =
            swap_test(&x, &y, 2000, &NoiseModel::noiseless(100 + i)).map_err(|e| e.to_string())?;
        worst = worst.max((est.estimate - overlap_sq(&x, &y)).abs());
    }
    let x = [0.3, -0.1, 0.8, 0.5];
    let same = swap_test_probability(&x, &x).map_err(|e| e.to_string())?;
    let ortho =
        swap_test_probability(&[1.0, 0.0, 0.0], &[0.0, 0.6, 0.8]).map_err(|e| e.to_string())?;
    check(
        worst <= SWAP_TOLERANCE && (same - 1.0).abs() < EXACT_TOLERANCE && (ortho - 0.5).abs() < EXACT_TOLERANCE,
        format!("20 pairs max |error| {worst:.4} (tol {SWAP_TOLERANCE}); Pr[0] x=y {same:.12}, x⊥y {ortho:.12}"),
    )
}

// ---------------------------------------------------------------------------
// 5. Amplitude-estimation SUM bound

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let q = 6;
    let mut within = 0;
    for t in 0..100 {
        let values: Vec<f64> = (0..8).map(|_| rng.gen_range(0..=100) as f64).collect();
        let v_max = values.iter().copied().fold(1.0, f64::max);
        let truth: f64 = values.iter().sum();
        let bound = 8.0 * v_max * (PI / 64.0 + PI * PI / 4096.0);
        let est = aggregate_sum(&values, v_max, q, 1, 1000 + t).map_err(|e| e.to_string())?;
        if (est.sum - truth).abs() <= bound {
            within += 1;
        }
    }
    check(
        within >= 81,
        format!("{within}/100 trials within N·V_max·(π/64 + π²/4096)"),
    )
}

// ---------------------------------------------------------------------------
// 6. Dürr–Høyer

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut found = 0;
    for t in 0..100 {
        let values: Vec<u64> = (0..64).map(|_| rng.gen_range(0..256)).collect();
        let r = durr_hoyer_min(&values, 8, 2000 + t, None).map_err(|e| e.to_string())?;
        if r.min_value == *values.iter().min().unwrap() && values[r.min_rid] == r.min_value {
            found += 1;
        }
    }
    check(
        found >= 90,
        format!("true minimum returned in {found}/100 instances"),
    )
}

// ---------------------------------------------------------------------------
// 7. Cost-model goldens

fn criterion_7() -> Outcome {
    let map = |v: &[(&str, f64)]| v.iter().map(|(k, x)| (k.to_string(), *x)).collect();
    let device = |durations: &[(&str, f64)], errors: &[(&str, f64)], t2: f64| DeviceModel {
        gate_durations_ns: map(durations),
        gate_errors: map(errors),
        t_ctrl_ns: 10.0,
        t2_eff_ns: t2,
        ..DeviceModel::default()
    };
    let mut errs = Vec::new();
    let mut c = Circuit::new(1);
    c.push(Gate::h(0)).push(Gate::x(0));
    let t =
        qutedb_core::optimizer::circuit_time(&c, &device(&[("H", 40.0), ("X", 30.0)], &[], 1e9))
            .map_err(|e| e.to_string())?;
    errs.push(("T_q (40,30)+2·10", rel(t, 90.0)));
    let mut c = Circuit::new(1);
    c.push(Gate::h(0));
    let t = qutedb_core::optimizer::circuit_time(&c, &device(&[("H", 20.0)], &[], 1e9))
        .map_err(|e| e.to_string())?;
    errs.push(("T_q 20+10", rel(t, 30.0)));
    let pk = layer_success(&[0.001, 0.001], 50.0, 100_000.0).map_err(|e| e.to_string())?;
    let pk_hand = 0.998 * (-50.0f64 / 100_000.0).exp();
    errs.push(("p_k", rel(pk, pk_hand)));
    let dev = device(&[("H", 50.0)], &[("H", 0.001)], 100_000.0);
    let mut c = Circuit::new(2);
    c.push(Gate::h(0))
        .push(Gate::h(1))
        .push(Gate::h(0))
        .push(Gate::h(1));
    let s = schedule_layers(&c, &dev).map_err(|e| e.to_string())?;
    let p = estimate_success(&c, &s, &dev).map_err(|e| e.to_string())?;
    errs.push(("P_q two layers", rel(p, pk_hand * pk_hand)));
    errs.push(("E[T_q]", rel(expected_runtime(0.9, 1e6, 1e7), 1.9e6)));
    let worst = errs.iter().map(|e| e.1).fold(0.0, f64::max);
    let failing: Vec<&str> = errs
        .iter()
        .filter(|e| e.1 > GOLDEN_TOLERANCE)
        .map(|e| e.0)
        .collect();
    check(
        failing.is_empty(),
        format!(
            "{} goldens, max relative error {worst:.1e}{}",
            errs.len(),
            if failing.is_empty() {
                String::new()
            } else {
                format!(", failing {failing:?}")
            }
        ),
    )
}

// ---------------------------------------------------------------------------
// 8. End-to-end exactness

fn random_engine(rng: &mut ChaCha8Rng, mode: PlanMode, noisy: bool) -> (Engine, usize) {
    let n = [64usize, 256, 1024][rng.gen_range(0..3)];
    let mut cfg = Config {
        noisy,
        seed: rng.gen(),
        ..Config::default()
    };
    cfg.policy.mode = mode;
    let mut e = Engine::new(cfg).unwrap();
    let mut script = String::from("CREATE TABLE r (a UINT(8), b UINT(4), v UINT(8));\nCREATE TABLE s (k UINT(8), w UINT(3));\n");
    let rows: Vec<String> = (0..n)
        .map(|_| {
            format!(
                "({}, {}, {})",
                rng.gen_range(0..256),
                rng.gen_range(0..16),
                rng.gen_range(0..256)
            )
        })
        .collect();
    script += &format!("INSERT INTO r VALUES {};\n", rows.join(", "));
    let inner: Vec<String> = (0..rng.gen_range(4..=12))
        .map(|_| format!("({}, {})", rng.gen_range(0..256), rng.gen_range(0..8)))
        .collect();
    script += &format!("INSERT INTO s VALUES {};\n", inner.join(", "));
    e.run_script(&script).unwrap();
    (e, n)
}

fn random_query(rng: &mut ChaCha8Rng, i: usize) -> String {
    let a = rng.gen_range(0..256);
    let b = rng.gen_range(0..16);
    match i % 5 {
        0 => format!("SELECT RID FROM r WHERE a = {a}"),
        1 => format!("SELECT RID FROM r WHERE b = {b} AND a > {a}"),
        2 => format!(
            "SELECT RID FROM r WHERE a BETWEEN {a} AND {} OR b = {b}",
            a + rng.gen_range(0..40)
        ),
        3 => format!("SELECT * FROM s JOIN r ON s.k = r.a WHERE r.b < {b}"),
        _ => format!("SELECT MIN(v) FROM r WHERE b <= {b}"),
    }
}

fn sorted_rows(rows: &[Vec<Value>]) -> Vec<String> {
    let mut v: Vec<String> = rows.iter().map(|r| format!("{r:?}")).collect();
    v.sort();
    v
}

fn criterion_8() -> Outcome {
    let mut quantum_nodes = 0;
    let mut fallbacks = 0;
    for noisy in [false, true] {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for i in 0..50 {
            let mut case_rng = ChaCha8Rng::seed_from_u64(rng.gen());
            let (mut q, n) = random_engine(&mut case_rng.clone(), PlanMode::ForceQuantum, noisy);
            let (mut c, _) = random_engine(&mut case_rng, PlanMode::ForceClassical, noisy);
            let sql = random_query(&mut rng, i);
            let t0 = Instant::now();
            let rq = q.query(&sql).map_err(|e| format!("{sql}: {e}"))?;
            if std::env::var_os("ACCEPTANCE_VERBOSE").is_some() {
                eprintln!(
                    "noisy={noisy} N={n} {:.2}s {sql}",
                    t0.elapsed().as_secs_f64()
                );
            }
            let rc = c.query(&sql).map_err(|e| format!("{sql}: {e}"))?;
            if sorted_rows(&rq.rows) != sorted_rows(&rc.rows) {
                return Err(format!(
                    "noisy={noisy} N={n} {sql}: quantum {} rows vs classical {} rows",
                    rq.rows.len(),
                    rc.rows.len()
                ));
            }
            quantum_nodes += rq
                .trace
                .iter()
                .filter(|t| t.realization == Realization::Quantum)
                .count();
            fallbacks += rq
                .trace
                .iter()
                .filter(|t| t.realization == Realization::Fallback)
                .count();
        }
    }
    check(quantum_nodes > 0, format!("100 queries (50 noiseless, 50 noisy) identical; {quantum_nodes} quantum nodes, {fallbacks} fallbacks"))
}

// ---------------------------------------------------------------------------
// 9. Index strategy

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut post = 0;
    for q in 0..200 {
        let n = rng.gen_range(16..=1024);
        let d = rng.gen_range(2..=4);
        let max = if rng.gen_bool(0.5) { 64u64 } else { 5000 };
        let cols: Vec<String> = (0..d).map(|k| format!("x{k}")).collect();
        let mut t = Table::new(
            "r",
            cols.iter()
                .map(|c| ColumnDef::new(c, ColumnType::UInt { bits: 16 }))
                .collect(),
        )
        .unwrap();
        let data: Vec<Vec<u64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.gen_range(0..=max)).collect())
            .collect();
        t.insert_rows(
            data.iter()
                .map(|r| r.iter().map(|&v| Value::UInt(v)).collect())
                .collect(),
        )
        .unwrap();
        let idx = MultiIndex::build(&t, &cols, rng.gen_range(3..=32), rng.gen_range(1..=16), 1.0)
            .map_err(|e| e.to_string())?;
        let bounds: Vec<(u64, u64)> = (0..d)
            .map(|_| {
                let (a, b) = (rng.gen_range(0..=max), rng.gen_range(0..=max));
                (a.min(b), a.max(b))
            })
            .collect();
        let ranges: Vec<DimRange> = bounds
            .iter()
            .zip(&cols)
            .map(|(&(lo, hi), c)| DimRange::new(c, KeyRange::closed(lo as f64, hi as f64)))
            .collect();
        let inside = |r: &Vec<u64>, k: usize| r[k] >= bounds[k].0 && r[k] <= bounds[k].1;
        let disjunctive = q % 4 == 3;
        let truth: Vec<usize> = (0..n)
            .filter(|&i| {
                if disjunctive {
                    (0..d).any(|k| inside(&data[i], k))
                } else {
                    (0..d).all(|k| inside(&data[i], k))
                }
            })
            .collect();
        let out = if disjunctive {
            idx.query_disjunctive(&ranges)
        } else {
            idx.query_conjunctive(&ranges)
        }
        .map_err(|e| e.to_string())?;
        if out.rids != truth {
            return Err(format!(
                "query {q}: index returned {} rows, brute force {}",
                out.rids.len(),
                truth.len()
            ));
        }
        if let Some(dec) = out.decision {
            if dec.chosen == Strategy::ClassicalPostFilter {
                post += 1;
                if out.residual_evals > dec.k_s * (d - 1) {
                    return Err(format!(
                        "query {q}: {} residual evaluations > k_s·(d−1) = {}",
                        out.residual_evals,
                        dec.k_s * (d - 1)
                    ));
                }
            }
        }
    }
    // two 4-bit dimensions; four rows with d1 in [5, 8], twelve with d2 in [1, 6]
    let pts = [
        (12, 3),
        (5, 2),
        (9, 7),
        (7, 9),
        (0, 1),
        (14, 4),
        (8, 6),
        (3, 12),
        (11, 5),
        (6, 3),
        (1, 1),
        (15, 2),
        (2, 6),
        (10, 4),
        (13, 14),
        (4, 5),
    ];
    let mut t = Table::new(
        "pts",
        vec![
            ColumnDef::new("d1", ColumnType::UInt { bits: 4 }),
            ColumnDef::new("d2", ColumnType::UInt { bits: 4 }),
        ],
    )
    .unwrap();
    t.insert_rows(
        pts.iter()
            .map(|&(a, b)| vec![Value::UInt(a), Value::UInt(b)])
            .collect(),
    )
    .unwrap();
    let idx =
        MultiIndex::build(&t, &["d1".into(), "d2".into()], 4, 2, 1.0).map_err(|e| e.to_string())?;
    let p1 = probe_dimension(&idx.btrees[0], &KeyRange::closed(5.0, 8.0));
    let p2 = probe_dimension(&idx.btrees[1], &KeyRange::closed(1.0, 6.0));
    let dec = select_strategy(&[p1.clone(), p2], 16, 1.0);
    let out = idx
        .query_conjunctive(&[
            DimRange::new("d1", KeyRange::closed(5.0, 8.0)),
            DimRange::new("d2", KeyRange::closed(1.0, 6.0)),
        ])
        .map_err(|e| e.to_string())?;
    let worked = p1.k == 4
        && dec.k_s == 4
        && dec.chosen == Strategy::ClassicalPostFilter
        && out.rids == vec![1, 6, 9]
        && out.residual_evals <= 4;
    check(
        worked && post > 0,
        format!("200 queries equal brute force ({post} post-filtered within k_s·(d−1)); worked example k₁={} → {:?} via {:?}", p1.k, out.rids, dec.chosen),
    )
}

// ---------------------------------------------------------------------------
// 10. Crossover reproduction

fn demo_config() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../demo/crossover.json")
}

fn criterion_10() -> Outcome {
    let device = DeviceModel::default();
    let cal = calibrate_on_simulator(4, 10, &device, &DepthModel::default(), 10)
        .map_err(|e| e.to_string())?;
    let mut cfg = CrossoverConfig::default();
    cfg.classical = cal.classical();
    cfg.quantum = cal.apply(&cfg.quantum);
    let report = crossover_analysis(&cfg).map_err(|e| e.to_string())?;
    let switches = report
        .rows
        .windows(2)
        .filter(|w| w[0].quantum_chosen != w[1].quantum_chosen)
        .count();
    let unique = report.n_star.is_some()
        && switches == 1
        && report.rows.last().is_some_and(|r| r.quantum_chosen);
    let demo = Config::load(&demo_config()).map_err(|e| e.to_string())?;
    let demo_star = crossover_analysis(&demo.crossover)
        .map_err(|e| e.to_string())?
        .n_star;
    let in_band = demo_star.is_some_and(|n| (2f64.powi(25)..=2f64.powi(35)).contains(&n));
    let fmt = |n: Option<f64>| n.map_or("none".to_string(), |n| format!("2^{}", n.log2().round()));
    check(
        unique && cal.max_rel_error_quantum <= CALIBRATION_TOLERANCE && in_band,
        format!(
            "(a) calibrated N*={} unique={unique}; (b) simulator-time fit max error {:.1}% (classical {:.1}%), tol {:.0}%; (c) demo N*={}",
            fmt(report.n_star),
            100.0 * cal.max_rel_error_quantum,
            100.0 * cal.max_rel_error_classical,
            100.0 * CALIBRATION_TOLERANCE,
            fmt(demo_star)
        ),
    )
}

fn main() {
    let criteria: [Check; 10] = [
        ("oracle equivalence", criterion_1),
        ("Grover analytic agreement", criterion_2),
        ("Grover noisy deviation", criterion_3),
        ("SWAP test accuracy", criterion_4),
        ("AE aggregate bound", criterion_5),
        ("Dürr–Høyer minimum", criterion_6),
        ("cost-model goldens", criterion_7),
        ("end-to-end exactness", criterion_8),
        ("index strategy", criterion_9),
        ("crossover reproduction", criterion_10),
    ];
    let filter: BTreeSet<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.contains(&(i + 1)) {
            continue;
        }
        let t0 = Instant::now();
        let result = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t0.elapsed().as_secs_f64();
        match result {
            Ok(msg) => println!("criterion {:>2} PASS [{secs:.1}s] {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL [{secs:.1}s] {name}: {msg}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
