use std::collections::BTreeMap;
use std::sync::Arc;

use super::{rid_qubits, CircuitError, MAX_CIRCUIT_QUBITS, MAX_RID_QUBITS};
use crate::predicate::{Bound, Predicate};
use crate::sim::{Circuit, Control, Gate, QromTable, SimError};
use crate::storage::{ColumnType, Table, Value, MAX_QUANTUM_BITS};

/// A predicate over integer-encoded columns of a [`QromLoader`].
#[derive(Debug, Clone, PartialEq)]
pub enum CodePred {
    Const(bool),
    Eq {
        col: usize,
        value: u64,
    },
    /// `lo <= v <= hi`.
    Interval {
        col: usize,
        lo: u64,
        hi: u64,
    },
    And(Vec<CodePred>),
    Or(Vec<CodePred>),
    Not(Box<CodePred>),
}

impl CodePred {
    pub fn eval(&self, loader: &QromLoader, rid: usize) -> bool {
        match self {
            CodePred::Const(b) => *b,
            CodePred::Eq { col, value } => loader.columns[*col].values[rid] == *value,
            CodePred::Interval { col, lo, hi } => {
                (*lo..=*hi).contains(&loader.columns[*col].values[rid])
            }
            CodePred::And(v) => v.iter().all(|p| p.eval(loader, rid)),
            CodePred::Or(v) => v.iter().any(|p| p.eval(loader, rid)),
            CodePred::Not(p) => !p.eval(loader, rid),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedColumn {
    pub name: String,
    pub bits: u32,
    pub values: Vec<u64>,
}

/// Per-RID classical values that oracles load coherently, plus the padding
/// and exclusion flags every oracle honours.
#[derive(Debug, Clone, PartialEq)]
pub struct QromLoader {
    /// RID register width; RIDs `rows..2^n` are padding and never match.
    pub n: usize,
    pub rows: usize,
    pub columns: Vec<LoadedColumn>,
    /// RIDs excluded from marking (already collected).
    pub found: Vec<bool>,
}

impl QromLoader {
    /// Loader over `rows` rows on an `n`-qubit RID register (smallest fitting if `None`).
    pub fn new(rows: usize, n: Option<usize>) -> Result<Self, CircuitError> {
        let need = rid_qubits(rows);
        let n = n.unwrap_or(need).max(need);
        if n > MAX_RID_QUBITS {
            return Err(SimError::CapacityExceeded {
                requested: n,
                cap: MAX_RID_QUBITS,
            }
            .into());
        }
        Ok(Self {
            n,
            rows,
            columns: Vec::new(),
            found: vec![false; rows],
        })
    }

    pub fn add_column(
        &mut self,
        name: &str,
        bits: u32,
        values: Vec<u64>,
    ) -> Result<usize, CircuitError> {
        if let Some(i) = self.columns.iter().position(|c| c.name == name) {
            return Ok(i);
        }
        if values.len() != self.rows {
            return Err(CircuitError::UnsupportedPredicate(format!(
                "column {name} has {} values for {} rows",
                values.len(),
                self.rows
            )));
        }
        if let Some(&v) = values.iter().find(|&&v| bits < 64 && v >> bits != 0) {
            return Err(CircuitError::WidthOverflow { value: v, bits });
        }
        self.columns.push(LoadedColumn {
            name: name.to_string(),
            bits,
            values,
        });
        Ok(self.columns.len() - 1)
    }

    pub fn from_table(table: &Table, pred: &Predicate) -> Result<(Self, CodePred), CircuitError> {
        let mut loader = Self::new(table.row_count(), None)?;
        let code = loader.translate(table, pred)?;
        Ok((loader, code))
    }

    fn load_table_column(
        &mut self,
        table: &Table,
        name: &str,
    ) -> Result<(usize, usize), CircuitError> {
        let idx = table
            .column_index(name)
            .map_err(|e| CircuitError::UnsupportedPredicate(e.to_string()))?;
        let bits = match table.columns[idx].ty {
            ColumnType::UInt { bits } if bits <= MAX_QUANTUM_BITS => bits as u32,
            ColumnType::Text => table.encoded_bits(idx).unwrap_or(1),
            ty => {
                return Err(CircuitError::UnsupportedPredicate(format!(
                    "column {name} of type {ty} has no circuit encoding"
                )))
            }
        };
        if let Some(i) = self
            .columns
            .iter()
            .position(|c| c.name == table.columns[idx].name)
        {
            return Ok((i, idx));
        }
        let values = (0..table.row_count())
            .map(|r| table.encoded(r, idx).unwrap_or(0))
            .collect();
        Ok((
            self.add_column(&table.columns[idx].name, bits, values)?,
            idx,
        ))
    }

    /// Translates a row predicate into code space, loading referenced columns.
    pub fn translate(&mut self, table: &Table, pred: &Predicate) -> Result<CodePred, CircuitError> {
        Ok(match pred {
            Predicate::Const(b) => CodePred::Const(*b),
            Predicate::And(v) => CodePred::And(
                v.iter()
                    .map(|p| self.translate(table, p))
                    .collect::<Result<_, _>>()?,
            ),
            Predicate::Or(v) => CodePred::Or(
                v.iter()
                    .map(|p| self.translate(table, p))
                    .collect::<Result<_, _>>()?,
            ),
            Predicate::Not(p) => CodePred::Not(Box::new(self.translate(table, p)?)),
            Predicate::Exists(_) => {
                return Err(CircuitError::UnsupportedPredicate(
                    "unresolved EXISTS".into(),
                ))
            }
            Predicate::Eq { column, value } => {
                let (col, tidx) = self.load_table_column(table, &column.column)?;
                let bits = self.columns[col].bits;
                match (table.columns[tidx].ty, value) {
                    (ColumnType::Text, Value::Text(s)) => {
                        match table.dictionary(tidx).binary_search(s) {
                            Ok(code) => CodePred::Eq {
                                col,
                                value: code as u64,
                            },
                            Err(_) => CodePred::Const(false),
                        }
                    }
                    (ColumnType::UInt { .. }, v) => match integral(v) {
                        Some(x) if x < 0.0 => CodePred::Const(false),
                        Some(x) => {
                            let x = x as u64;
                            if bits < 64 && x >> bits != 0 {
                                return Err(CircuitError::WidthOverflow { value: x, bits });
                            }
                            CodePred::Eq { col, value: x }
                        }
                        None if v.as_f64().is_some() => CodePred::Const(false),
                        None => {
                            return Err(CircuitError::UnsupportedPredicate(format!(
                                "{column} = {v}"
                            )))
                        }
                    },
                    (_, v) => {
                        return Err(CircuitError::UnsupportedPredicate(format!(
                            "{column} = {v}"
                        )))
                    }
                }
            }
            Predicate::Range { column, low, high } => {
                let (col, tidx) = self.load_table_column(table, &column.column)?;
                let max = mask(self.columns[col].bits) as i128;
                let lo = match low {
                    None => 0,
                    Some(b) => lower_code(table, tidx, b)?,
                };
                let hi = match high {
                    None => max,
                    Some(b) => upper_code(table, tidx, b)?,
                };
                let (lo, hi) = (lo.max(0), hi.min(max));
                if lo > hi {
                    CodePred::Const(false)
                } else {
                    CodePred::Interval {
                        col,
                        lo: lo as u64,
                        hi: hi as u64,
                    }
                }
            }
            Predicate::PrefixLike { column, prefix } => {
                if prefix.contains(['%', '_']) {
                    return Err(CircuitError::UnsupportedPredicate(format!(
                        "LIKE pattern with interior wildcard '{prefix}'"
                    )));
                }
                let (col, tidx) = self.load_table_column(table, &column.column)?;
                if table.columns[tidx].ty != ColumnType::Text {
                    return Err(CircuitError::UnsupportedPredicate(format!(
                        "LIKE on non-text column {column}"
                    )));
                }
                let (lo, hi) = table.prefix_code_range(tidx, prefix);
                if lo >= hi {
                    CodePred::Const(false)
                } else {
                    CodePred::Interval {
                        col,
                        lo,
                        hi: hi - 1,
                    }
                }
            }
        })
    }

    pub fn exclude(&mut self, rids: impl IntoIterator<Item = usize>) {
        for r in rids {
            if r < self.rows {
                self.found[r] = true;
            }
        }
    }

    /// Classical meaning of the oracle built from `pred` over this loader.
    pub fn is_marked(&self, pred: &CodePred, rid: usize) -> bool {
        rid < self.rows && !self.found[rid] && pred.eval(self, rid)
    }

    pub fn marked_set(&self, pred: &CodePred) -> Vec<usize> {
        (0..self.rows)
            .filter(|&r| self.is_marked(pred, r))
            .collect()
    }

    pub fn domain(&self) -> usize {
        1 << self.n
    }
}

fn mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1 << bits) - 1
    }
}

fn integral(v: &Value) -> Option<f64> {
    let x = v.as_f64()?;
    (x.fract() == 0.0).then_some(x)
}

fn lower_code(table: &Table, col: usize, b: &Bound) -> Result<i128, CircuitError> {
    Ok(match (&table.columns[col].ty, &b.value) {
        (ColumnType::Text, Value::Text(s)) => table.code_rank(col, s, b.inclusive) as i128,
        (ColumnType::UInt { .. }, v) => {
            let x = v
                .as_f64()
                .ok_or_else(|| CircuitError::UnsupportedPredicate(format!("bound {v}")))?;
            if b.inclusive {
                x.ceil() as i128
            } else {
                x.floor() as i128 + 1
            }
        }
        (_, v) => return Err(CircuitError::UnsupportedPredicate(format!("bound {v}"))),
    })
}

fn upper_code(table: &Table, col: usize, b: &Bound) -> Result<i128, CircuitError> {
    Ok(match (&table.columns[col].ty, &b.value) {
        (ColumnType::Text, Value::Text(s)) => table.code_rank(col, s, !b.inclusive) as i128 - 1,
        (ColumnType::UInt { .. }, v) => {
            let x = v
                .as_f64()
                .ok_or_else(|| CircuitError::UnsupportedPredicate(format!("bound {v}")))?;
            if b.inclusive {
                x.floor() as i128
            } else {
                x.ceil() as i128 - 1
            }
        }
        (_, v) => return Err(CircuitError::UnsupportedPredicate(format!("bound {v}"))),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterLayout {
    pub rid: Vec<usize>,
    pub valid: usize,
    pub found: usize,
    /// Shared value register; columns are loaded into its low bits one at a time.
    pub value: Vec<usize>,
    pub ancillas: Vec<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AncillaCounts {
    /// Logic flags combining subconditions.
    pub orc: usize,
    /// Comparator carries and comparator output flags.
    pub cmp: usize,
    /// Prefix-match flags.
    pub pref: usize,
}

/// Phase oracle |x⟩ → (−1)^{f(x)}|x⟩ built as compute, phase, uncompute.
#[derive(Debug, Clone)]
pub struct PredicateOracle {
    pub circuit: Circuit,
    /// Loads and condition evaluation; the oracle is `compute`, `phase`, `compute⁻¹`.
    pub compute: Vec<Gate>,
    /// `None` when the predicate is unsatisfiable.
    pub phase: Option<Gate>,
    /// Controls that fire exactly on marked, restored-ancilla states after `compute`.
    pub marking: Option<Vec<Control>>,
    pub layout: RegisterLayout,
    pub ancillas: AncillaCounts,
    pub marked_count_hint: Option<usize>,
    pub pred: CodePred,
    pub loader: Arc<QromLoader>,
}

impl PredicateOracle {
    pub fn n(&self) -> usize {
        self.layout.rid.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.circuit.n_qubits
    }

    pub fn is_marked(&self, rid: usize) -> bool {
        self.loader.is_marked(&self.pred, rid)
    }

    pub fn marked_set(&self) -> Vec<usize> {
        self.loader.marked_set(&self.pred)
    }

    /// Oracle gates with the phase step additionally conditioned on `extra`.
    pub fn controlled_gates(&self, extra: &[Control]) -> Vec<Gate> {
        let mut g = self.compute.clone();
        if let Some(p) = &self.phase {
            g.push(p.clone().controlled_by(extra));
        }
        g.extend(self.compute.iter().rev().map(Gate::inverse));
        g
    }

    pub fn uncompute(&self) -> Vec<Gate> {
        self.compute.iter().rev().map(Gate::inverse).collect()
    }
}

#[derive(Debug, Clone)]
enum Cond {
    False,
    Controls(Vec<Control>),
}

impl Cond {
    fn truth() -> Self {
        Cond::Controls(Vec::new())
    }

    fn and(a: Cond, b: Cond) -> Cond {
        match (a, b) {
            (Cond::Controls(mut x), Cond::Controls(y)) => {
                for c in y {
                    match x.iter().find(|d| d.qubit == c.qubit) {
                        Some(d) if d.polarity != c.polarity => return Cond::False,
                        Some(_) => {}
                        None => x.push(c),
                    }
                }
                Cond::Controls(x)
            }
            _ => Cond::False,
        }
    }
}

struct Builder<'a> {
    loader: &'a QromLoader,
    gates: Vec<Gate>,
    next: usize,
    rid: Vec<usize>,
    value: Vec<usize>,
    carries: Vec<usize>,
    ancillas: Vec<usize>,
    counts: AncillaCounts,
}

impl Builder<'_> {
    fn alloc(&mut self) -> usize {
        let q = self.next;
        self.next += 1;
        self.ancillas.push(q);
        q
    }

    fn load(&mut self, col: usize) {
        let c = &self.loader.columns[col];
        let table = QromTable {
            address: self.rid.clone(),
            data: c.values.clone(),
        };
        let targets = self.value[..c.bits as usize].to_vec();
        self.gates.push(Gate::qrom(Arc::new(table), targets));
    }

    fn materialize(
        &mut self,
        cond: Cond,
        counter: fn(&mut AncillaCounts) -> &mut usize,
    ) -> Option<Control> {
        match cond {
            Cond::False => None,
            Cond::Controls(c) if c.len() == 1 => Some(c[0]),
            Cond::Controls(c) => {
                let f = self.alloc();
                *counter(&mut self.counts) += 1;
                self.gates.push(Gate::x(f).controlled_by(&c));
                Some(Control::on(f))
            }
        }
    }

    /// Copies a condition that reads the value register into a flag, so it
    /// survives the column being unloaded.
    fn detach(&mut self, cond: Cond) -> Cond {
        match cond {
            Cond::Controls(c) if c.iter().any(|x| self.value.contains(&x.qubit)) => {
                let f = self.alloc();
                self.counts.orc += 1;
                self.gates.push(Gate::x(f).controlled_by(&c));
                Cond::Controls(vec![Control::on(f)])
            }
            other => other,
        }
    }

    /// Flag qubit holding `v >= c` for the column currently in the value register, 1 <= c < 2^b.
    fn geq(&mut self, bits: usize, c: u64) -> usize {
        while self.carries.len() + 1 < bits {
            let q = self.alloc();
            self.counts.cmp += 1;
            self.carries.push(q);
        }
        let flag = self.alloc();
        self.counts.cmp += 1;
        // carry-out of v + (2^b - c) is set exactly when v >= c
        let k = (1u64 << bits).wrapping_sub(c);
        let mut cur: Option<usize> = None;
        let mut carry_gates = Vec::new();
        for i in 0..bits {
            let target = if i + 1 == bits { flag } else { self.carries[i] };
            let r = self.value[i];
            let ki = (k >> i) & 1 == 1;
            let stage: Vec<Gate> = match (ki, cur) {
                (false, None) => Vec::new(),
                (false, Some(cq)) => vec![Gate::mcx(&[Control::on(r), Control::on(cq)], target)],
                (true, None) => vec![Gate::cnot(r, target)],
                (true, Some(cq)) => vec![
                    Gate::mcx(&[Control::off(r), Control::off(cq)], target),
                    Gate::x(target),
                ],
            };
            if !stage.is_empty() {
                cur = Some(target);
            }
            if i + 1 == bits {
                self.gates.extend(stage);
            } else {
                self.gates.extend(stage.iter().cloned());
                carry_gates.extend(stage);
            }
        }
        self.gates
            .extend(carry_gates.iter().rev().map(Gate::inverse));
        flag
    }

    fn interval(&mut self, col: usize, lo: u64, hi: u64) -> Cond {
        let bits = self.loader.columns[col].bits as usize;
        let max = mask(bits as u32);
        if lo > hi {
            return Cond::False;
        }
        if lo == 0 && hi == max {
            return Cond::truth();
        }
        let width = hi - lo + 1;
        if width.is_power_of_two() && lo.is_multiple_of(width) {
            let j = width.trailing_zeros() as usize;
            let c = (j..bits)
                .map(|i| Control {
                    qubit: self.value[i],
                    polarity: (lo >> i) & 1 == 1,
                })
                .collect();
            return Cond::Controls(c);
        }
        let mut cond = Cond::truth();
        if lo > 0 {
            let f = self.geq(bits, lo);
            cond = Cond::and(cond, Cond::Controls(vec![Control::on(f)]));
        }
        if hi < max {
            let f = self.geq(bits, hi + 1);
            cond = Cond::and(cond, Cond::Controls(vec![Control::off(f)]));
        }
        cond
    }

    fn atom(&mut self, p: &CodePred) -> Cond {
        match *p {
            CodePred::Eq { col, value } => {
                let bits = self.loader.columns[col].bits as usize;
                Cond::Controls(
                    (0..bits)
                        .map(|i| Control {
                            qubit: self.value[i],
                            polarity: (value >> i) & 1 == 1,
                        })
                        .collect(),
                )
            }
            CodePred::Interval { col, lo, hi } => self.interval(col, lo, hi),
            _ => unreachable!("atoms are Eq or Interval"),
        }
    }

    fn combine(
        &mut self,
        p: &CodePred,
        atoms: &mut BTreeMap<usize, Cond>,
        counter: &mut usize,
    ) -> Cond {
        match p {
            CodePred::Const(true) => Cond::truth(),
            CodePred::Const(false) => Cond::False,
            CodePred::Eq { .. } | CodePred::Interval { .. } => {
                let id = *counter;
                *counter += 1;
                atoms.remove(&id).expect("atom evaluated")
            }
            CodePred::And(v) => {
                let mut acc = Cond::truth();
                for c in v {
                    let x = self.combine(c, atoms, counter);
                    acc = Cond::and(acc, x);
                }
                acc
            }
            CodePred::Or(v) => {
                let mut parts = Vec::new();
                let mut any_true = false;
                for c in v {
                    match self.combine(c, atoms, counter) {
                        Cond::False => {}
                        Cond::Controls(x) if x.is_empty() => any_true = true,
                        x => parts.push(x),
                    }
                }
                if any_true {
                    return Cond::truth();
                }
                match parts.len() {
                    0 => Cond::False,
                    1 => parts.pop().unwrap(),
                    _ => {
                        let lines: Vec<Control> = parts
                            .into_iter()
                            .filter_map(|c| self.materialize(c, |a| &mut a.orc))
                            .collect();
                        // nor = 1 iff every disjunct is false
                        let nor = self.alloc();
                        self.counts.orc += 1;
                        let inv: Vec<Control> = lines
                            .iter()
                            .map(|c| Control {
                                qubit: c.qubit,
                                polarity: !c.polarity,
                            })
                            .collect();
                        self.gates.push(Gate::x(nor).controlled_by(&inv));
                        Cond::Controls(vec![Control::off(nor)])
                    }
                }
            }
            CodePred::Not(inner) => match self.combine(inner, atoms, counter) {
                Cond::False => Cond::truth(),
                Cond::Controls(x) if x.is_empty() => Cond::False,
                c => {
                    let line = self
                        .materialize(c, |a| &mut a.orc)
                        .expect("non-false condition");
                    Cond::Controls(vec![Control {
                        qubit: line.qubit,
                        polarity: !line.polarity,
                    }])
                }
            },
        }
    }
}

fn collect_atoms<'p>(p: &'p CodePred, out: &mut Vec<&'p CodePred>) {
    match p {
        CodePred::Eq { .. } | CodePred::Interval { .. } => out.push(p),
        CodePred::And(v) | CodePred::Or(v) => v.iter().for_each(|c| collect_atoms(c, out)),
        CodePred::Not(c) => collect_atoms(c, out),
        CodePred::Const(_) => {}
    }
}

fn atom_col(p: &CodePred) -> usize {
    match p {
        CodePred::Eq { col, .. } | CodePred::Interval { col, .. } => *col,
        _ => unreachable!(),
    }
}

/// Compiles `pred` into a phase oracle over the loader's RID register.
///
/// Qubit layout: RID register `0..n`, then the valid and found flags, then a
/// shared value register as wide as the widest referenced column, then
/// comparator carries and logic flags. Columns are loaded one after another
/// into the value register; all but the last are unloaded once their
/// subconditions sit in flag qubits.
pub fn compile_oracle(
    pred: &CodePred,
    loader: &QromLoader,
) -> Result<PredicateOracle, CircuitError> {
    let n = loader.n;
    let mut atoms = Vec::new();
    collect_atoms(pred, &mut atoms);
    let b_max = atoms
        .iter()
        .map(|a| loader.columns[atom_col(a)].bits as usize)
        .max()
        .unwrap_or(0);
    let rid: Vec<usize> = (0..n).collect();
    let (valid, found) = (n, n + 1);
    let value: Vec<usize> = (n + 2..n + 2 + b_max).collect();
    let mut b = Builder {
        loader,
        gates: Vec::new(),
        next: n + 2 + b_max,
        rid: rid.clone(),
        value: value.clone(),
        carries: Vec::new(),
        ancillas: Vec::new(),
        counts: AncillaCounts::default(),
    };

    let meta: Vec<u64> = (0..loader.rows)
        .map(|r| 1 | (loader.found[r] as u64) << 1)
        .collect();
    b.gates.push(Gate::qrom(
        Arc::new(QromTable {
            address: rid.clone(),
            data: meta,
        }),
        vec![valid, found],
    ));

    let mut order: Vec<usize> = Vec::new();
    for a in &atoms {
        let c = atom_col(a);
        if !order.contains(&c) {
            order.push(c);
        }
    }
    let mut conds: BTreeMap<usize, Cond> = BTreeMap::new();
    for (gi, &col) in order.iter().enumerate() {
        let last = gi + 1 == order.len();
        b.load(col);
        for (id, a) in atoms.iter().enumerate().filter(|(_, a)| atom_col(a) == col) {
            let c = b.atom(a);
            let c = if last { c } else { b.detach(c) };
            conds.insert(id, c);
        }
        if !last {
            b.load(col);
        }
    }
    let mut counter = 0;
    let root = b.combine(pred, &mut conds, &mut counter);

    if b.next > MAX_CIRCUIT_QUBITS {
        return Err(SimError::CapacityExceeded {
            requested: b.next,
            cap: MAX_CIRCUIT_QUBITS,
        }
        .into());
    }
    let marking = match Cond::and(root, Cond::Controls(vec![Control::off(found)])) {
        Cond::False => None,
        Cond::Controls(c) => Some(c),
    };
    let phase = marking.as_ref().map(|c| Gate::z(valid).controlled_by(c));
    let compute = std::mem::take(&mut b.gates);
    let mut circuit = Circuit::new(b.next).with_measured(rid.clone());
    circuit.extend(compute.iter().cloned());
    if let Some(p) = &phase {
        circuit.push(p.clone());
    }
    circuit.extend(compute.iter().rev().map(Gate::inverse));
    let marking = marking.map(|mut c| {
        c.push(Control::on(valid));
        c
    });
    Ok(PredicateOracle {
        circuit,
        compute,
        phase,
        marking,
        layout: RegisterLayout {
            rid,
            valid,
            found,
            value,
            ancillas: b.ancillas,
        },
        ancillas: b.counts,
        marked_count_hint: None,
        pred: pred.clone(),
        loader: Arc::new(loader.clone()),
    })
}
