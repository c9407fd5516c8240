use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::table::{ColumnData, ColumnDef, Table};
use super::{ColumnType, StorageError, Value};
use crate::predicate::{Bound, ColumnRef, Predicate};

/// Upper bound on per-predicate selectivity of generated workloads.
pub const MAX_SELECTIVITY: f64 = 0.02;

const VALUE_BITS: u8 = 16;

/// Target selectivity of one range predicate per generated column.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectivitySpec {
    pub targets: Vec<f64>,
}

impl SelectivitySpec {
    pub fn uniform(columns: usize, target: f64) -> Self {
        Self {
            targets: vec![target; columns],
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticTable {
    pub table: Table,
    /// `predicates[i]` is a closed range on column `c{i}` hitting `targets[i]`.
    pub predicates: Vec<Predicate>,
    /// Exact number of rows each predicate matches.
    pub matches: Vec<usize>,
}

/// Uniform random 16-bit columns `c0..` plus one range predicate per column whose
/// true selectivity is within ±10% (relative) of its target.
pub fn generate_synthetic(
    name: &str,
    n: usize,
    spec: &SelectivitySpec,
    seed: u64,
) -> Result<SyntheticTable, StorageError> {
    if !n.is_power_of_two() {
        return Err(StorageError::InfeasibleSelectivity(format!(
            "N = {n} is not a power of two"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols = Vec::new();
    let mut predicates = Vec::new();
    let mut matches = Vec::new();
    for (i, &target) in spec.targets.iter().enumerate() {
        if !(target > 0.0 && target <= MAX_SELECTIVITY) {
            return Err(StorageError::InfeasibleSelectivity(format!(
                "target {target} outside (0, {MAX_SELECTIVITY}]"
            )));
        }
        let want = target * n as f64;
        let (lo_ok, hi_ok) = ((want * 0.9).ceil() as usize, (want * 1.1).floor() as usize);
        if lo_ok == 0 || lo_ok > hi_ok {
            return Err(StorageError::InfeasibleSelectivity(format!(
                "no row count within 10% of {want:.3} at N = {n}"
            )));
        }
        let values: Vec<u64> = (0..n)
            .map(|_| rng.gen_range(0..1u64 << VALUE_BITS))
            .collect();
        let mut sorted = values.clone();
        sorted.sort_unstable();
        let m = (want.round() as usize).clamp(lo_ok, hi_ok);
        let mut found = None;
        for _ in 0..64 {
            let s = rng.gen_range(0..=n - m);
            let (lo, hi) = (sorted[s], sorted[s + m - 1]);
            let count = sorted.iter().filter(|&&v| v >= lo && v <= hi).count();
            if (lo_ok..=hi_ok).contains(&count) {
                found = Some((lo, hi, count));
                break;
            }
        }
        let (lo, hi, count) = found.ok_or_else(|| {
            StorageError::InfeasibleSelectivity("too many duplicate values".into())
        })?;
        let name_i = format!("c{i}");
        predicates.push(Predicate::Range {
            column: ColumnRef::bare(&name_i),
            low: Some(Bound::inclusive(Value::UInt(lo))),
            high: Some(Bound::inclusive(Value::UInt(hi))),
        });
        matches.push(count);
        cols.push((
            ColumnDef::new(&name_i, ColumnType::UInt { bits: VALUE_BITS }),
            ColumnData::UInt(values),
        ));
    }
    let table = Table::from_columns(name, cols)?;
    Ok(SyntheticTable {
        table,
        predicates,
        matches,
    })
}
