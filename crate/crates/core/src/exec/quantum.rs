use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use super::{classical_aggregate, classical_filter, normalized_overlap, ExecContext};
use crate::circuits::{
    amplitude_estimate, build_filtered_sum_prep, build_grover_circuit, compile_oracle,
    counting_phase_bits, durr_hoyer_over, estimate_bound, grover_iterations, grover_sample,
    grover_with_k, quantum_count, success_probability, swap_test, AeProblem, CircuitError,
    CodePred, QromLoader,
};
use crate::optimizer::{adapt, circuit_time, AdaptState, AdaptationAction, Feedback, PlanNode};
use crate::predicate::{Bound, ColumnRef, Predicate};
use crate::sql::ast::{AggCall, AggFunc, CmpOp};
use crate::storage::{Table, Value};

/// Stop collecting after this many consecutive rounds without a new RID.
const STALE_ROUNDS: usize = 3;
const MAX_ROUNDS: usize = 64;
/// Shots of each quantum-counting readout.
const COUNT_SHOTS: usize = 256;
/// Predicted success below this is treated as a dead device.
const MIN_VIABLE_SUCCESS: f64 = 1e-6;
/// Attempts for EXISTS and uncertified MIN before falling back.
const RETRIES: u64 = 3;

/// Accounting of one quantum realization.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuantumRun {
    /// Verified RIDs, ascending.
    pub rids: Vec<usize>,
    pub shots: usize,
    pub rounds: usize,
    pub adaptations: Vec<AdaptationAction>,
    pub device_ns: f64,
    pub fell_back: bool,
    pub note: Option<String>,
}

impl QuantumRun {
    fn fallback(&mut self, reason: impl Into<String>) {
        self.fell_back = true;
        if self.adaptations.last() != Some(&AdaptationAction::Fallback) {
            self.adaptations.push(AdaptationAction::Fallback);
        }
        self.note = Some(reason.into());
    }

    fn absorb(&mut self, other: &QuantumRun) {
        self.shots += other.shots;
        self.rounds += other.rounds;
        self.adaptations.extend(other.adaptations.iter().copied());
        self.device_ns += other.device_ns;
    }
}

/// Deduplicates measured RIDs and keeps those that satisfy `pred` on `table`.
pub fn reconcile(raw_hits: &[usize], pred: &Predicate, table: &Table) -> Vec<usize> {
    raw_hits
        .iter()
        .copied()
        .filter(|&r| r < table.row_count())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .filter(|&r| pred.eval_row(table, r))
        .collect()
}

fn predicted_success(node: &PlanNode) -> f64 {
    node.profile.map_or(1.0, |p| p.p_q)
}

fn budget_ns(ctx: &ExecContext, start: Instant) -> Option<f64> {
    ctx.latency_budget_ns
        .map(|b| (b - start.elapsed().as_nanos() as f64).max(0.0))
}

/// Iteration count maximizing analytic success among {0, the optimal formula}.
fn best_k(dom: usize, m: usize) -> Result<usize, CircuitError> {
    let k = grover_iterations(dom, m)?;
    Ok(
        if success_probability(dom, m, 0) >= success_probability(dom, m, k) {
            0
        } else {
            k
        },
    )
}

/// Exact filter by Grover rounds: quantum counting sizes the first round, each
/// round excludes RIDs already verified, and a residual count certifies that
/// nothing is left.
fn grover_rounds(
    table: &Table,
    pred: &Predicate,
    ctx: &ExecContext,
    p_q: f64,
    seed: u64,
    start: Instant,
) -> Result<QuantumRun, CircuitError> {
    let (mut loader, code) = QromLoader::from_table(table, pred)?;
    let dom = loader.domain();
    let q = counting_phase_bits(loader.n);
    let noise = ctx.noise(seed);
    let mut run = QuantumRun::default();
    let mut m_hat = quantum_count(&compile_oracle(&code, &loader)?, q, COUNT_SHOTS, seed)?;
    let mut found: BTreeSet<usize> = BTreeSet::new();
    let mut stale = 0;
    let mut shots = ctx.shots;
    let mut halve = false;
    let mut state = AdaptState {
        caps: ctx.adapt,
        ..AdaptState::new(
            ctx.shots,
            grover_iterations(dom, m_hat.clamp(1, dom))?,
            budget_ns(ctx, start),
        )
    };
    for round in 0..MAX_ROUNDS as u64 {
        if found.len() >= m_hat || stale > 0 {
            let residual = quantum_count(
                &compile_oracle(&code, &loader)?,
                q,
                COUNT_SHOTS,
                seed.wrapping_add(round + 1),
            )?;
            if residual == 0 {
                run.rids = found.into_iter().collect();
                return Ok(run);
            }
            if stale >= STALE_ROUNDS {
                run.fallback(format!(
                    "{residual} rows left uncollected after {STALE_ROUNDS} empty rounds"
                ));
                return Ok(run);
            }
            m_hat = found.len() + residual;
        }
        let oracle = compile_oracle(&code, &loader)?;
        let remaining = (m_hat - found.len()).clamp(1, dom);
        let mut k = best_k(dom, remaining)?;
        if halve {
            k /= 2;
        }
        let r = grover_with_k(
            &oracle,
            k,
            shots,
            &noise.with_seed(seed.wrapping_add(round)),
        )?;
        run.shots += shots;
        run.rounds += 1;
        run.device_ns += shots as f64
            * (circuit_time(&build_grover_circuit(&oracle, k), &ctx.device).unwrap_or(0.0)
                + ctx.device.t_measure_ns);
        let raw: Vec<usize> = r.raw_hits.keys().map(|&x| x as usize).collect();
        let fresh: Vec<usize> = reconcile(&raw, pred, table)
            .into_iter()
            .filter(|x| !found.contains(x))
            .collect();
        stale = if fresh.is_empty() { stale + 1 } else { 0 };
        loader.exclude(fresh.iter().copied());
        found.extend(fresh.iter().copied());
        let fb = Feedback {
            observed_success: r.success_estimate,
            predicted_success: success_probability(dom, remaining, k) * p_q,
            elapsed_ns: start.elapsed().as_nanos() as f64,
            quality_ok: !fresh.is_empty(),
        };
        match adapt(&mut state, &fb) {
            AdaptationAction::None => {}
            a @ AdaptationAction::IncreaseShots { shots: s } => {
                shots = s;
                run.adaptations.push(a);
            }
            a @ AdaptationAction::SwitchVariant { shots: s, .. } => {
                shots = s;
                halve = true;
                run.adaptations.push(a);
            }
            AdaptationAction::Fallback => {
                run.fallback("adaptation exhausted or budget exceeded");
                return Ok(run);
            }
        }
    }
    run.fallback("round limit reached");
    Ok(run)
}

/// Rows of `table` satisfying `pred`, collected by Grover rounds; falls back to
/// a classical scan on failure, so the result is always exact.
pub(crate) fn collect(
    table: &Table,
    pred: &Predicate,
    ctx: &ExecContext,
    node: &PlanNode,
    seed: u64,
    start: Instant,
) -> QuantumRun {
    let p_q = predicted_success(node);
    let mut run = if p_q < MIN_VIABLE_SUCCESS {
        let mut r = QuantumRun::default();
        r.fallback(format!("predicted success {p_q:.2e}"));
        r
    } else {
        grover_rounds(table, pred, ctx, p_q, seed, start).unwrap_or_else(|e| {
            let mut r = QuantumRun::default();
            r.fallback(e.to_string());
            r
        })
    };
    if run.fell_back {
        run.rids = classical_filter(table, pred);
    }
    run
}

/// Condition on the inner column equivalent to `key op inner`.
fn key_atom(column: &str, op: CmpOp, key: &Value) -> Predicate {
    let column = ColumnRef::bare(column);
    let v = key.clone();
    match op {
        CmpOp::Eq => Predicate::Eq { column, value: v },
        CmpOp::Ne => Predicate::Not(Box::new(Predicate::Eq { column, value: v })),
        CmpOp::Lt => Predicate::Range {
            column,
            low: Some(Bound::exclusive(v)),
            high: None,
        },
        CmpOp::Le => Predicate::Range {
            column,
            low: Some(Bound::inclusive(v)),
            high: None,
        },
        CmpOp::Gt => Predicate::Range {
            column,
            low: None,
            high: Some(Bound::exclusive(v)),
        },
        CmpOp::Ge => Predicate::Range {
            column,
            low: None,
            high: Some(Bound::inclusive(v)),
        },
    }
}

/// Join by one Grover probe of the inner table per distinct outer key.
/// Returns `(outer index, inner RID)` pairs.
#[allow(clippy::too_many_arguments)]
pub(crate) fn probe_join(
    inner: &Table,
    inner_pred: &Predicate,
    inner_col: &str,
    op: CmpOp,
    keys: &[Value],
    ctx: &ExecContext,
    node: &PlanNode,
    seed: u64,
    start: Instant,
) -> (Vec<(usize, usize)>, QuantumRun) {
    let mut total = QuantumRun::default();
    let mut cache: HashMap<String, Vec<usize>> = HashMap::new();
    let (mut probes, mut fallbacks) = (0usize, 0usize);
    let mut pairs = Vec::new();
    for (i, key) in keys.iter().enumerate() {
        let tag = format!("{key:?}");
        if !cache.contains_key(&tag) {
            let pred = Predicate::and(vec![inner_pred.clone(), key_atom(inner_col, op, key)]);
            let r = collect(
                inner,
                &pred,
                ctx,
                node,
                seed.wrapping_add(probes as u64 * 7919),
                start,
            );
            probes += 1;
            fallbacks += usize::from(r.fell_back);
            total.absorb(&r);
            cache.insert(tag.clone(), r.rids);
        }
        pairs.extend(cache[&tag].iter().map(|&r| (i, r)));
    }
    total.fell_back = probes > 0 && fallbacks == probes;
    total.note = Some(format!("{probes} probes, {fallbacks} classical"));
    (pairs, total)
}

/// Similarity join by one SWAP test per pair. Approximate: each decision uses an
/// estimate within the returned bound with high probability.
pub(crate) fn swap_join(
    xs: &[Vec<f64>],
    ys: &[Vec<f64>],
    threshold: f64,
    ctx: &ExecContext,
    node: &PlanNode,
    seed: u64,
    _start: Instant,
) -> (Vec<(usize, usize)>, QuantumRun, f64) {
    let mut run = QuantumRun::default();
    let bound = 1.5 / (ctx.shots.max(1) as f64).sqrt();
    let per_pair = node
        .artifact
        .as_ref()
        .map_or(0.0, |a| a.circuit_ns + ctx.device.t_measure_ns);
    let mut pairs = Vec::new();
    let mut n = 0u64;
    for (i, x) in xs.iter().enumerate() {
        for (j, y) in ys.iter().enumerate() {
            n += 1;
            let est = match swap_test(x, y, ctx.shots, &ctx.noise(seed.wrapping_add(n))) {
                Ok(e) => {
                    run.shots += ctx.shots;
                    run.rounds += 1;
                    run.device_ns += ctx.shots as f64 * per_pair;
                    e.estimate
                }
                Err(_) => normalized_overlap(x, y),
            };
            if est > threshold {
                pairs.push((i, j));
            }
        }
    }
    (pairs, run, bound)
}

fn column_values(table: &Table, column: &str) -> Option<(usize, Vec<f64>)> {
    let idx = table.column_index(column).ok()?;
    let v: Option<Vec<f64>> = (0..table.row_count())
        .map(|r| table.value(r, idx).as_f64())
        .collect();
    Some((idx, v?))
}

fn classical_value(table: &Table, pred: &Predicate, call: &AggCall) -> Value {
    let rids = classical_filter(table, pred);
    let values: Vec<Value> = match &call.arg {
        None => rids.iter().map(|_| Value::UInt(1)).collect(),
        Some(a) => {
            let idx = table
                .column_index(&a.column)
                .expect("aggregate argument resolved");
            rids.iter().map(|&r| table.value(r, idx)).collect()
        }
    };
    classical_aggregate(call.func, &values).unwrap_or(Value::Real(f64::NAN))
}

struct Estimate {
    value: f64,
    bound: f64,
}

fn estimate_count(
    loader: &QromLoader,
    code: &CodePred,
    q: usize,
    shots: usize,
    seed: u64,
) -> Result<Estimate, CircuitError> {
    let dom = loader.domain() as f64;
    let est = AeProblem::counting(&compile_oracle(code, loader)?)?.estimate(q, shots, seed)?;
    Ok(Estimate {
        value: est.a_hat * dom,
        bound: dom * estimate_bound(q),
    })
}

fn estimate_sum(
    loader: &QromLoader,
    code: &CodePred,
    values: &[f64],
    q: usize,
    shots: usize,
    seed: u64,
) -> Result<(Estimate, f64), CircuitError> {
    let v_max = values.iter().copied().fold(0.0, f64::max);
    if v_max <= 0.0 {
        return Ok((
            Estimate {
                value: 0.0,
                bound: 0.0,
            },
            0.0,
        ));
    }
    let (a, good, _) = build_filtered_sum_prep(loader, code, values, v_max)?;
    let est = amplitude_estimate(&a, good, q, shots, seed)?;
    let scale = loader.domain() as f64 * v_max;
    Ok((
        Estimate {
            value: est.a_hat * scale,
            bound: scale * estimate_bound(q),
        },
        v_max,
    ))
}

fn min_by_durr_hoyer(
    table: &Table,
    pred: &Predicate,
    column: &str,
    ctx: &ExecContext,
    seed: u64,
    run: &mut QuantumRun,
) -> Result<Option<Value>, CircuitError> {
    let (mut loader, code) = QromLoader::from_table(table, pred)?;
    let idx = table
        .column_index(column)
        .map_err(|e| CircuitError::UnsupportedPredicate(e.to_string()))?;
    let bits = table
        .encoded_bits(idx)
        .ok_or_else(|| CircuitError::UnsupportedPredicate(format!("{column} has no encoding")))?;
    let codes: Vec<u64> = (0..table.row_count())
        .map(|r| table.encoded(r, idx).unwrap_or(0))
        .collect();
    let col = loader.add_column(column, bits, codes)?;
    let noise = ctx.noise(seed);
    for attempt in 0..RETRIES {
        let Some(res) = durr_hoyer_over(
            &loader,
            &code,
            col,
            seed.wrapping_add(attempt),
            ctx.noisy.then_some(&noise),
        )?
        else {
            return Ok(None);
        };
        run.rounds += 1;
        run.shots += res.grover_iterations.max(1);
        let trail: Vec<usize> = res.trail.iter().map(|&(r, _)| r).collect();
        let verified = reconcile(&trail, pred, table);
        let best = verified
            .iter()
            .copied()
            .min_by_key(|&r| (table.encoded(r, idx).unwrap_or(u64::MAX), r));
        if res.certified {
            if let Some(r) = best {
                return Ok(Some(table.value(r, idx)));
            }
        }
        run.adaptations.push(AdaptationAction::IncreaseShots {
            shots: (attempt as usize + 2),
        });
    }
    Err(CircuitError::UnsupportedPredicate(
        "minimum not certified".into(),
    ))
}

/// Single aggregate over a filtered table. COUNT, SUM and AVG come from
/// amplitude estimation with an additive bound; MIN is exact after the
/// classical check of the Dürr–Høyer trail.
pub(crate) fn aggregate(
    table: &Table,
    pred: &Predicate,
    call: &AggCall,
    ctx: &ExecContext,
    node: &PlanNode,
    seed: u64,
    _start: Instant,
) -> (Value, Option<f64>, QuantumRun) {
    let mut run = QuantumRun {
        device_ns: node.profile.map_or(0.0, |p| p.t_q_ns),
        ..Default::default()
    };
    if predicted_success(node) < MIN_VIABLE_SUCCESS {
        run.fallback("predicted success ≈ 0");
        return (classical_value(table, pred, call), None, run);
    }
    let q = ctx.phase_bits;
    let attempt = || -> Result<(Value, Option<f64>), CircuitError> {
        let (loader, code) = QromLoader::from_table(table, pred)?;
        let values = || {
            call.arg
                .as_ref()
                .and_then(|a| column_values(table, &a.column))
                .ok_or_else(|| CircuitError::UnsupportedPredicate("non-numeric argument".into()))
        };
        match call.func {
            AggFunc::Count => {
                let c = estimate_count(&loader, &code, q, ctx.shots, seed)?;
                Ok((Value::Real(c.value), Some(c.bound)))
            }
            AggFunc::Sum => {
                let (_, v) = values()?;
                let (s, _) = estimate_sum(&loader, &code, &v, q, ctx.shots, seed)?;
                Ok((Value::Real(s.value), Some(s.bound)))
            }
            AggFunc::Avg => {
                let (_, v) = values()?;
                let (s, v_max) = estimate_sum(&loader, &code, &v, q, ctx.shots, seed)?;
                let c = estimate_count(&loader, &code, q, ctx.shots, seed ^ 1)?;
                if c.value < 1.0 {
                    return Err(CircuitError::ZeroMatches);
                }
                Ok((
                    Value::Real(s.value / c.value),
                    Some((s.bound + v_max * c.bound) / c.value),
                ))
            }
            AggFunc::Min => unreachable!("handled separately"),
        }
    };
    let result = match call.func {
        AggFunc::Min => {
            let column = call
                .arg
                .as_ref()
                .map(|a| a.column.clone())
                .unwrap_or_default();
            min_by_durr_hoyer(table, pred, &column, ctx, seed, &mut run)
                .map(|v| (v.unwrap_or(Value::Real(f64::NAN)), None))
        }
        _ => {
            run.shots += ctx.shots;
            run.rounds += 1;
            attempt()
        }
    };
    match result {
        Ok((v, b)) => (v, b, run),
        Err(e) => {
            run.fallback(e.to_string());
            (classical_value(table, pred, call), None, run)
        }
    }
}

/// Whether any row satisfies `pred`: counting, then a verified Grover witness.
pub(crate) fn exists(
    table: &Table,
    pred: &Predicate,
    ctx: &ExecContext,
    node: &PlanNode,
    seed: u64,
    start: Instant,
) -> (bool, QuantumRun) {
    let mut run = QuantumRun::default();
    if predicted_success(node) < MIN_VIABLE_SUCCESS {
        run.fallback("predicted success ≈ 0");
        return (!classical_filter(table, pred).is_empty(), run);
    }
    let attempt = |run: &mut QuantumRun| -> Result<Option<bool>, CircuitError> {
        let (loader, code) = QromLoader::from_table(table, pred)?;
        let oracle = compile_oracle(&code, &loader)?;
        let m = quantum_count(&oracle, counting_phase_bits(loader.n), COUNT_SHOTS, seed)?;
        if m == 0 {
            return Ok(Some(false));
        }
        let dom = loader.domain();
        let k = best_k(dom, m.min(dom))?;
        for attempt in 0..RETRIES {
            let r = grover_with_k(
                &oracle,
                k,
                ctx.shots,
                &ctx.noise(seed.wrapping_add(attempt)),
            )?;
            run.shots += ctx.shots;
            run.rounds += 1;
            run.device_ns += ctx.shots as f64
                * (circuit_time(&build_grover_circuit(&oracle, k), &ctx.device).unwrap_or(0.0)
                    + ctx.device.t_measure_ns);
            let raw: Vec<usize> = r.raw_hits.keys().map(|&x| x as usize).collect();
            if !reconcile(&raw, pred, table).is_empty() {
                return Ok(Some(true));
            }
            if start.elapsed().as_nanos() as f64 > ctx.latency_budget_ns.unwrap_or(f64::INFINITY) {
                break;
            }
        }
        Ok(None)
    };
    match attempt(&mut run) {
        Ok(Some(b)) => (b, run),
        Ok(None) => {
            run.fallback("no verified witness");
            (!classical_filter(table, pred).is_empty(), run)
        }
        Err(e) => {
            run.fallback(e.to_string());
            (!classical_filter(table, pred).is_empty(), run)
        }
    }
}

/// Up to `k` distinct rows satisfying `pred`, drawn by Grover sampling.
pub(crate) fn sample(
    table: &Table,
    pred: &Predicate,
    k: usize,
    ctx: &ExecContext,
    node: &PlanNode,
    seed: u64,
    _start: Instant,
) -> (Vec<usize>, QuantumRun) {
    let mut run = QuantumRun {
        device_ns: node.profile.map_or(0.0, |p| p.t_q_ns),
        ..Default::default()
    };
    let drawn = QromLoader::from_table(table, pred)
        .and_then(|(loader, code)| grover_sample(&loader, &code, k, ctx.shots, &ctx.noise(seed)));
    match drawn {
        Ok(rids) => {
            run.shots += ctx.shots;
            run.rounds += 1;
            let mut rids = reconcile(&rids, pred, table);
            rids.truncate(k);
            (rids, run)
        }
        Err(e) => {
            run.fallback(e.to_string());
            let mut rids = classical_filter(table, pred);
            rids.truncate(k);
            (rids, run)
        }
    }
}
