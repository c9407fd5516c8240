//! Selective probing over per-column B⁺-trees with escalation to a KD-tree.

mod bptree;
mod kdtree;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::predicate::{Bound, Predicate};
use crate::storage::{ColumnType, Table, Value};

pub use bptree::{BPlusTreeIndex, ProbeStats};
pub use kdtree::{KdSearch, KdTreeIndex};

pub const DEFAULT_ORDER: usize = 16;
pub const DEFAULT_LEAF_SIZE: usize = 8;
/// At most this many dimensions are probed per query.
pub const MAX_PROBES: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IndexError {
    #[error("no index on column {0}")]
    NoIndex(String),
    #[error("column {0} cannot be indexed")]
    UnsupportedColumn(String),
}

/// One-dimensional key interval; `-inf`/`inf` ends are unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyRange {
    pub lo: f64,
    pub lo_inclusive: bool,
    pub hi: f64,
    pub hi_inclusive: bool,
}

impl KeyRange {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            lo_inclusive: true,
            hi,
            hi_inclusive: true,
        }
    }

    pub fn all() -> Self {
        Self::closed(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_inclusive {
            x >= self.lo
        } else {
            x > self.lo
        };
        let below = if self.hi_inclusive {
            x <= self.hi
        } else {
            x < self.hi
        };
        above && below
    }

    /// True when some x in `[min, max]` lies in the range.
    pub fn overlaps(&self, min: f64, max: f64) -> bool {
        let above = if self.lo_inclusive {
            max >= self.lo
        } else {
            max > self.lo
        };
        let below = if self.hi_inclusive {
            min <= self.hi
        } else {
            min < self.hi
        };
        above && below && !self.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_inclusive && self.hi_inclusive))
    }

    pub fn intersect(&self, other: &KeyRange) -> KeyRange {
        let (lo, lo_inclusive) = match self.lo.total_cmp(&other.lo) {
            std::cmp::Ordering::Greater => (self.lo, self.lo_inclusive),
            std::cmp::Ordering::Less => (other.lo, other.lo_inclusive),
            std::cmp::Ordering::Equal => (self.lo, self.lo_inclusive && other.lo_inclusive),
        };
        let (hi, hi_inclusive) = match self.hi.total_cmp(&other.hi) {
            std::cmp::Ordering::Less => (self.hi, self.hi_inclusive),
            std::cmp::Ordering::Greater => (other.hi, other.hi_inclusive),
            std::cmp::Ordering::Equal => (self.hi, self.hi_inclusive && other.hi_inclusive),
        };
        KeyRange {
            lo,
            lo_inclusive,
            hi,
            hi_inclusive,
        }
    }

    /// Fraction of `[min, max]` the range covers, a cheap selectivity guess.
    pub fn coverage(&self, min: f64, max: f64) -> f64 {
        if max <= min {
            return if self.contains(min) { 1.0 } else { 0.0 };
        }
        let lo = self.lo.max(min);
        let hi = self.hi.min(max);
        ((hi - lo) / (max - min)).clamp(0.0, 1.0)
    }

    /// Range for a numeric `Eq` or `Range` predicate: `(column, range)`.
    pub fn from_predicate(pred: &Predicate) -> Option<(String, KeyRange)> {
        let num = |v: &Value| match v {
            Value::UInt(_) | Value::Real(_) => v.as_f64(),
            _ => None,
        };
        match pred {
            Predicate::Eq { column, value } => {
                num(value).map(|x| (column.column.clone(), KeyRange::closed(x, x)))
            }
            Predicate::Range { column, low, high } => {
                let end = |b: &Option<Bound>, inf: f64| match b {
                    None => Some((inf, true)),
                    Some(b) => num(&b.value).map(|x| (x, b.inclusive)),
                };
                let (lo, lo_inclusive) = end(low, f64::NEG_INFINITY)?;
                let (hi, hi_inclusive) = end(high, f64::INFINITY)?;
                Some((
                    column.column.clone(),
                    KeyRange {
                        lo,
                        lo_inclusive,
                        hi,
                        hi_inclusive,
                    },
                ))
            }
            _ => None,
        }
    }
}

/// A range restriction on one indexed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct DimRange {
    pub column: String,
    pub range: KeyRange,
}

impl DimRange {
    pub fn new(column: &str, range: KeyRange) -> Self {
        Self {
            column: column.to_string(),
            range,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    pub dimension: String,
    pub rids: Vec<usize>,
    pub k: usize,
    pub stats: ProbeStats,
}

pub fn probe_dimension(index: &BPlusTreeIndex, range: &KeyRange) -> ProbeResult {
    let (mut rids, stats) = index.probe(range);
    rids.sort_unstable();
    ProbeResult {
        dimension: index.column.clone(),
        k: rids.len(),
        rids,
        stats,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    ClassicalPostFilter,
    KdTreeSearch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyDecision {
    pub chosen: Strategy,
    pub k_s: usize,
    /// c·log2(N).
    pub threshold: f64,
    /// Position of the smallest probe in the input list.
    pub smallest: usize,
}

/// Smallest probe wins; post-filter classically iff k_s ≤ c·log2(N).
pub fn select_strategy(probes: &[ProbeResult], n: usize, c: f64) -> StrategyDecision {
    let (smallest, k_s) = probes
        .iter()
        .enumerate()
        .map(|(i, p)| (i, p.k))
        .min_by_key(|&(i, k)| (k, i))
        .unwrap_or((0, n));
    let threshold = c * (n.max(1) as f64).log2();
    let chosen = if k_s as f64 <= threshold {
        Strategy::ClassicalPostFilter
    } else {
        Strategy::KdTreeSearch
    };
    StrategyDecision {
        chosen,
        k_s,
        threshold,
        smallest,
    }
}

/// Keeps the candidates satisfying every residual range; `evals` counts
/// single-range evaluations (short-circuiting per candidate).
pub fn classical_post_filter(
    candidates: &[usize],
    residual: &[(usize, KeyRange)],
    key: &dyn Fn(usize, usize) -> f64,
    evals: &mut usize,
) -> Vec<usize> {
    candidates
        .iter()
        .copied()
        .filter(|&rid| {
            residual.iter().all(|(dim, r)| {
                *evals += 1;
                r.contains(key(rid, *dim))
            })
        })
        .collect()
}

/// Union of per-disjunct probe results, ascending.
pub fn disjunctive_probe(probes: &[ProbeResult]) -> Vec<usize> {
    probes
        .iter()
        .flat_map(|p| p.rids.iter().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexOutcome {
    pub rids: Vec<usize>,
    pub probes: Vec<ProbeResult>,
    pub decision: Option<StrategyDecision>,
    /// Residual range checks performed by the post-filter.
    pub residual_evals: usize,
    pub kd: Option<KdSearch>,
}

/// B⁺-trees on each indexed column plus a KD-tree over all of them.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiIndex {
    pub table: String,
    pub dims: Vec<String>,
    points: Vec<Vec<f64>>,
    extents: Vec<(f64, f64)>,
    pub btrees: Vec<BPlusTreeIndex>,
    pub kd: KdTreeIndex,
    /// Threshold constant c in k_s ≤ c·log2(N).
    pub c: f64,
}

impl MultiIndex {
    pub fn build(
        table: &Table,
        columns: &[String],
        order: usize,
        leaf_size: usize,
        c: f64,
    ) -> Result<Self, IndexError> {
        let mut idx = Vec::with_capacity(columns.len());
        let mut dims = Vec::with_capacity(columns.len());
        for name in columns {
            let i = table
                .column_index(name)
                .map_err(|_| IndexError::NoIndex(name.clone()))?;
            if !matches!(
                table.columns[i].ty,
                ColumnType::UInt { .. } | ColumnType::Real
            ) {
                return Err(IndexError::UnsupportedColumn(name.clone()));
            }
            idx.push(i);
            dims.push(table.columns[i].name.clone());
        }
        let points: Vec<Vec<f64>> = (0..table.row_count())
            .map(|r| {
                idx.iter()
                    .map(|&i| table.value(r, i).as_f64().unwrap_or(f64::NAN))
                    .collect()
            })
            .collect();
        let btrees = dims
            .iter()
            .enumerate()
            .map(|(k, d)| {
                BPlusTreeIndex::build(
                    d,
                    order,
                    points.iter().enumerate().map(|(r, p)| (p[k], r)).collect(),
                )
            })
            .collect();
        let kd = KdTreeIndex::build(dims.clone(), leaf_size, points.clone());
        let extents = (0..dims.len())
            .map(|k| {
                points
                    .iter()
                    .map(|p| p[k])
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                        (lo.min(v), hi.max(v))
                    })
            })
            .collect();
        Ok(Self {
            table: table.name.clone(),
            dims,
            points,
            extents,
            btrees,
            kd,
            c,
        })
    }

    pub fn rows(&self) -> usize {
        self.points.len()
    }

    pub fn dim(&self, column: &str) -> Option<usize> {
        self.dims
            .iter()
            .position(|d| d.eq_ignore_ascii_case(column))
    }

    pub fn key(&self, rid: usize, dim: usize) -> f64 {
        self.points[rid][dim]
    }

    fn resolve(&self, ranges: &[DimRange]) -> Result<Vec<Option<KeyRange>>, IndexError> {
        let mut boxed: Vec<Option<KeyRange>> = vec![None; self.dims.len()];
        for r in ranges {
            let k = self
                .dim(&r.column)
                .ok_or_else(|| IndexError::NoIndex(r.column.clone()))?;
            boxed[k] = Some(boxed[k].map_or(r.range, |cur| cur.intersect(&r.range)));
        }
        Ok(boxed)
    }

    /// Exact rids satisfying every range, via probes and the chosen strategy.
    pub fn query_conjunctive(&self, ranges: &[DimRange]) -> Result<IndexOutcome, IndexError> {
        let boxed = self.resolve(ranges)?;
        let mut active: Vec<(usize, KeyRange)> = boxed
            .iter()
            .enumerate()
            .filter_map(|(k, r)| r.map(|r| (k, r)))
            .collect();
        if active.is_empty() {
            return Ok(IndexOutcome {
                rids: (0..self.rows()).collect(),
                probes: Vec::new(),
                decision: None,
                residual_evals: 0,
                kd: None,
            });
        }
        // probe cheapest-looking dimensions first
        active.sort_by(|a, b| {
            let cov = |(k, r): &(usize, KeyRange)| {
                let (lo, hi) = self.extents[*k];
                r.coverage(lo, hi)
            };
            cov(a).total_cmp(&cov(b)).then(a.0.cmp(&b.0))
        });
        let probed: Vec<(usize, KeyRange)> = active.iter().take(MAX_PROBES).copied().collect();
        let probes: Vec<ProbeResult> = probed
            .iter()
            .map(|(k, r)| probe_dimension(&self.btrees[*k], r))
            .collect();
        let decision = select_strategy(&probes, self.rows(), self.c);
        let mut evals = 0;
        let (rids, kd) = match decision.chosen {
            Strategy::ClassicalPostFilter => {
                let chosen_dim = probed[decision.smallest].0;
                let residual: Vec<(usize, KeyRange)> = active
                    .iter()
                    .filter(|(k, _)| *k != chosen_dim)
                    .copied()
                    .collect();
                let key = |rid: usize, dim: usize| self.points[rid][dim];
                (
                    classical_post_filter(
                        &probes[decision.smallest].rids,
                        &residual,
                        &key,
                        &mut evals,
                    ),
                    None,
                )
            }
            Strategy::KdTreeSearch => {
                let s = self.kd.search(&boxed);
                let mut out = s.contained.clone();
                out.extend(
                    s.candidates
                        .iter()
                        .copied()
                        .filter(|&r| self.kd.point_in(r, &boxed)),
                );
                out.sort_unstable();
                (out, Some(s))
            }
        };
        Ok(IndexOutcome {
            rids,
            probes,
            decision: Some(decision),
            residual_evals: evals,
            kd,
        })
    }

    /// Exact rids satisfying any range: one probe per disjunct, unioned.
    pub fn query_disjunctive(&self, ranges: &[DimRange]) -> Result<IndexOutcome, IndexError> {
        let mut probes = Vec::with_capacity(ranges.len());
        for r in ranges {
            let k = self
                .dim(&r.column)
                .ok_or_else(|| IndexError::NoIndex(r.column.clone()))?;
            probes.push(probe_dimension(&self.btrees[k], &r.range));
        }
        Ok(IndexOutcome {
            rids: disjunctive_probe(&probes),
            probes,
            decision: None,
            residual_evals: 0,
            kd: None,
        })
    }
}

/// Splits an index-shaped predicate into ranges: `(ranges, disjunctive)`.
/// Returns `None` unless it is a single range, a conjunction of ranges or a
/// disjunction of ranges over numeric constants.
pub fn index_ranges(pred: &Predicate) -> Option<(Vec<DimRange>, bool)> {
    let leaf = |p: &Predicate| {
        KeyRange::from_predicate(p).map(|(c, r)| DimRange {
            column: c,
            range: r,
        })
    };
    match pred {
        Predicate::And(parts) => Some((parts.iter().map(leaf).collect::<Option<Vec<_>>>()?, false)),
        Predicate::Or(parts) => Some((parts.iter().map(leaf).collect::<Option<Vec<_>>>()?, true)),
        p => Some((vec![leaf(p)?], false)),
    }
}
