use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ColumnType, StorageError, Value};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub min: Option<Value>,
    pub max: Option<Value>,
    pub distinct: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnDef {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: ColumnType,
    #[serde(default)]
    pub stats: ColumnStats,
}

impl ColumnDef {
    pub fn new(name: &str, ty: ColumnType) -> Self {
        Self {
            name: name.to_string(),
            ty,
            stats: ColumnStats::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    UInt(Vec<u64>),
    Real(Vec<f64>),
    Text(Vec<String>),
    Vector(Vec<Vec<f64>>),
}

impl ColumnData {
    fn empty(ty: ColumnType) -> Self {
        match ty {
            ColumnType::UInt { .. } => ColumnData::UInt(Vec::new()),
            ColumnType::Real => ColumnData::Real(Vec::new()),
            ColumnType::Text => ColumnData::Text(Vec::new()),
            ColumnType::Vector { .. } => ColumnData::Vector(Vec::new()),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ColumnData::UInt(v) => v.len(),
            ColumnData::Real(v) => v.len(),
            ColumnData::Text(v) => v.len(),
            ColumnData::Vector(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, rid: usize) -> Value {
        match self {
            ColumnData::UInt(v) => Value::UInt(v[rid]),
            ColumnData::Real(v) => Value::Real(v[rid]),
            ColumnData::Text(v) => Value::Text(v[rid].clone()),
            ColumnData::Vector(v) => Value::Vector(v[rid].clone()),
        }
    }
}

/// A columnar table. Row identifiers are dense positions `0..row_count`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<ColumnDef>,
    data: Vec<ColumnData>,
    /// Sorted distinct strings per text column (empty for other types).
    dicts: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: Vec<ColumnDef>) -> Result<Self, StorageError> {
        let mut seen = HashSet::new();
        for c in &columns {
            if c.name.is_empty() || c.name.eq_ignore_ascii_case("rid") {
                return Err(StorageError::SchemaMismatch(format!(
                    "invalid column name '{}'",
                    c.name
                )));
            }
            if !seen.insert(c.name.to_ascii_lowercase()) {
                return Err(StorageError::SchemaMismatch(format!(
                    "duplicate column {}",
                    c.name
                )));
            }
            match c.ty {
                ColumnType::UInt { bits } if bits == 0 || bits > 64 => {
                    return Err(StorageError::SchemaMismatch(format!(
                        "{}: width must be 1..=64 bits",
                        c.name
                    )))
                }
                ColumnType::Vector { dim: 0 } => {
                    return Err(StorageError::SchemaMismatch(format!(
                        "{}: vector dimension must be positive",
                        c.name
                    )))
                }
                _ => {}
            }
        }
        let data = columns.iter().map(|c| ColumnData::empty(c.ty)).collect();
        let dicts = vec![Vec::new(); columns.len()];
        let mut t = Self {
            name: name.to_string(),
            columns,
            data,
            dicts,
        };
        t.refresh_stats();
        Ok(t)
    }

    pub fn row_count(&self) -> usize {
        self.data.first().map_or(0, ColumnData::len)
    }

    pub fn column_index(&self, name: &str) -> Result<usize, StorageError> {
        self.columns
            .iter()
            .position(|c| c.name.eq_ignore_ascii_case(name))
            .ok_or_else(|| StorageError::UnknownColumn(format!("{}.{name}", self.name)))
    }

    pub fn column_def(&self, name: &str) -> Result<&ColumnDef, StorageError> {
        Ok(&self.columns[self.column_index(name)?])
    }

    pub fn column(&self, name: &str) -> Result<&ColumnData, StorageError> {
        Ok(&self.data[self.column_index(name)?])
    }

    pub fn column_at(&self, idx: usize) -> &ColumnData {
        &self.data[idx]
    }

    pub fn value(&self, rid: usize, col: usize) -> Value {
        self.data[col].get(rid)
    }

    pub fn row(&self, rid: usize) -> Vec<Value> {
        self.data.iter().map(|c| c.get(rid)).collect()
    }

    /// Rows in RID order.
    pub fn scan(&self) -> impl Iterator<Item = (usize, Vec<Value>)> + '_ {
        (0..self.row_count()).map(move |r| (r, self.row(r)))
    }

    fn coerce(&self, col: usize, v: Value) -> Result<Value, StorageError> {
        let def = &self.columns[col];
        let bad = |v: &Value| {
            StorageError::SchemaMismatch(format!(
                "column {} ({}) cannot hold {v}",
                def.name, def.ty
            ))
        };
        Ok(match (def.ty, v) {
            (ColumnType::UInt { bits }, Value::UInt(x)) => {
                if bits < 64 && x >> bits != 0 {
                    return Err(StorageError::WidthOverflow {
                        value: x,
                        bits: bits as u32,
                    });
                }
                Value::UInt(x)
            }
            (ColumnType::Real, Value::UInt(x)) => Value::Real(x as f64),
            (ColumnType::Real, Value::Real(x)) => Value::Real(x),
            (ColumnType::Text, Value::Text(s)) => Value::Text(s),
            (ColumnType::Vector { dim }, Value::Vector(v)) if v.len() == dim => Value::Vector(v),
            (_, v) => return Err(bad(&v)),
        })
    }

    /// Appends rows (all-or-nothing) and refreshes statistics. Returns the first new RID.
    pub fn insert_rows(&mut self, rows: Vec<Vec<Value>>) -> Result<usize, StorageError> {
        let mut checked = Vec::with_capacity(rows.len());
        for row in rows {
            if row.len() != self.columns.len() {
                return Err(StorageError::SchemaMismatch(format!(
                    "expected {} values, got {}",
                    self.columns.len(),
                    row.len()
                )));
            }
            let r: Result<Vec<Value>, StorageError> = row
                .into_iter()
                .enumerate()
                .map(|(i, v)| self.coerce(i, v))
                .collect();
            checked.push(r?);
        }
        let first = self.row_count();
        for row in checked {
            for (col, v) in self.data.iter_mut().zip(row) {
                match (col, v) {
                    (ColumnData::UInt(c), Value::UInt(x)) => c.push(x),
                    (ColumnData::Real(c), Value::Real(x)) => c.push(x),
                    (ColumnData::Text(c), Value::Text(x)) => c.push(x),
                    (ColumnData::Vector(c), Value::Vector(x)) => c.push(x),
                    _ => unreachable!("coerced above"),
                }
            }
        }
        self.refresh_stats();
        Ok(first)
    }

    /// Builds a table directly from column data of equal length.
    pub fn from_columns(
        name: &str,
        columns: Vec<(ColumnDef, ColumnData)>,
    ) -> Result<Self, StorageError> {
        let (defs, data): (Vec<_>, Vec<_>) = columns.into_iter().unzip();
        let mut t = Self::new(name, defs)?;
        if let Some(n) = data.first().map(ColumnData::len) {
            if data.iter().any(|d| d.len() != n) {
                return Err(StorageError::SchemaMismatch(
                    "columns differ in length".into(),
                ));
            }
        }
        for (i, d) in data.iter().enumerate() {
            let ok = matches!(
                (t.columns[i].ty, d),
                (ColumnType::UInt { .. }, ColumnData::UInt(_))
                    | (ColumnType::Real, ColumnData::Real(_))
                    | (ColumnType::Text, ColumnData::Text(_))
                    | (ColumnType::Vector { .. }, ColumnData::Vector(_))
            );
            if !ok {
                return Err(StorageError::SchemaMismatch(format!(
                    "data for {} has the wrong type",
                    t.columns[i].name
                )));
            }
            if let (ColumnType::UInt { bits }, ColumnData::UInt(v)) = (t.columns[i].ty, d) {
                if let Some(&x) = v.iter().find(|&&x| bits < 64 && x >> bits != 0) {
                    return Err(StorageError::WidthOverflow {
                        value: x,
                        bits: bits as u32,
                    });
                }
            }
            if let (ColumnType::Vector { dim }, ColumnData::Vector(v)) = (t.columns[i].ty, d) {
                if v.iter().any(|x| x.len() != dim) {
                    return Err(StorageError::SchemaMismatch(format!(
                        "vector of wrong dimension in {}",
                        t.columns[i].name
                    )));
                }
            }
        }
        t.data = data;
        t.refresh_stats();
        Ok(t)
    }

    pub fn refresh_stats(&mut self) {
        for (i, col) in self.data.iter().enumerate() {
            let stats = &mut self.columns[i].stats;
            self.dicts[i].clear();
            match col {
                ColumnData::UInt(v) => {
                    stats.min = v.iter().min().map(|&x| Value::UInt(x));
                    stats.max = v.iter().max().map(|&x| Value::UInt(x));
                    stats.distinct = v.iter().collect::<HashSet<_>>().len();
                }
                ColumnData::Real(v) => {
                    stats.min = v.iter().copied().reduce(f64::min).map(Value::Real);
                    stats.max = v.iter().copied().reduce(f64::max).map(Value::Real);
                    stats.distinct = v.iter().map(|x| x.to_bits()).collect::<HashSet<_>>().len();
                }
                ColumnData::Text(v) => {
                    let mut d: Vec<String> = v.clone();
                    d.sort();
                    d.dedup();
                    stats.min = d.first().cloned().map(Value::Text);
                    stats.max = d.last().cloned().map(Value::Text);
                    stats.distinct = d.len();
                    self.dicts[i] = d;
                }
                ColumnData::Vector(v) => {
                    stats.min = None;
                    stats.max = None;
                    stats.distinct = v.len();
                }
            }
        }
    }

    /// Width of the circuit encoding of a column, if it has one.
    pub fn encoded_bits(&self, col: usize) -> Option<u32> {
        match self.columns[col].ty {
            ColumnType::UInt { bits } => Some(bits as u32),
            ColumnType::Text => {
                let n = self.dicts[col].len().max(2);
                Some(usize::BITS - (n - 1).leading_zeros())
            }
            _ => None,
        }
    }

    /// Circuit encoding of one cell: the integer itself, or the text's dictionary code.
    pub fn encoded(&self, rid: usize, col: usize) -> Option<u64> {
        match &self.data[col] {
            ColumnData::UInt(v) => Some(v[rid]),
            ColumnData::Text(v) => self.dicts[col]
                .binary_search(&v[rid])
                .ok()
                .map(|c| c as u64),
            _ => None,
        }
    }

    /// Sorted distinct strings of a text column.
    pub fn dictionary(&self, col: usize) -> &[String] {
        &self.dicts[col]
    }

    /// Dictionary codes `[lo, hi)` of the strings starting with `prefix`.
    pub fn prefix_code_range(&self, col: usize, prefix: &str) -> (u64, u64) {
        let d = &self.dicts[col];
        let lo = d.partition_point(|s| s.as_str() < prefix);
        let hi = lo + d[lo..].partition_point(|s| s.starts_with(prefix));
        (lo as u64, hi as u64)
    }

    /// Number of dictionary entries `< s` (for `strict`) or `<= s`.
    pub fn code_rank(&self, col: usize, s: &str, strict: bool) -> u64 {
        let d = &self.dicts[col];
        (if strict {
            d.partition_point(|x| x.as_str() < s)
        } else {
            d.partition_point(|x| x.as_str() <= s)
        }) as u64
    }

    /// Appends rows from a CSV file whose header names the table's columns.
    pub fn ingest_csv(&mut self, path: &Path) -> Result<usize, StorageError> {
        let file = std::fs::File::open(path)?;
        self.ingest_csv_reader(file)
    }

    pub fn ingest_csv_reader<R: Read>(&mut self, reader: R) -> Result<usize, StorageError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header = rdr
            .headers()
            .map_err(|e| StorageError::ParseError {
                line: 1,
                message: e.to_string(),
            })?
            .clone();
        if header.len() != self.columns.len() {
            return Err(StorageError::SchemaMismatch(format!(
                "header has {} fields, table {} has {} columns",
                header.len(),
                self.name,
                self.columns.len()
            )));
        }
        let mut order = Vec::with_capacity(header.len());
        for h in header.iter() {
            order.push(
                self.column_index(h).map_err(|_| {
                    StorageError::SchemaMismatch(format!("unknown header field {h}"))
                })?,
            );
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| StorageError::ParseError {
                line,
                message: e.to_string(),
            })?;
            let mut row = vec![Value::UInt(0); self.columns.len()];
            for (field, &col) in rec.iter().zip(&order) {
                row[col] = parse_cell(field, self.columns[col].ty)
                    .map_err(|message| StorageError::ParseError { line, message })?;
            }
            rows.push(row);
        }
        let n = rows.len();
        self.insert_rows(rows)?;
        Ok(n)
    }

    pub(super) fn data(&self) -> &[ColumnData] {
        &self.data
    }
}

/// Parses one CSV cell; vectors are semicolon-separated reals.
pub(crate) fn parse_cell(field: &str, ty: ColumnType) -> Result<Value, String> {
    match ty {
        ColumnType::UInt { .. } => match field {
            "true" | "TRUE" => Ok(Value::UInt(1)),
            "false" | "FALSE" => Ok(Value::UInt(0)),
            _ => field
                .parse::<u64>()
                .map(Value::UInt)
                .map_err(|e| format!("'{field}': {e}")),
        },
        ColumnType::Real => field
            .parse::<f64>()
            .map(Value::Real)
            .map_err(|e| format!("'{field}': {e}")),
        ColumnType::Text => Ok(Value::Text(field.to_string())),
        ColumnType::Vector { .. } => field
            .split(';')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("'{p}': {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(Value::Vector),
    }
}

/// Basis index of a row identifier on an `n`-qubit register (little-endian).
pub fn basis_encode(rid: u64, n: u32) -> Result<u64, StorageError> {
    if n < 64 && rid >> n != 0 {
        return Err(StorageError::WidthOverflow {
            value: rid,
            bits: n,
        });
    }
    Ok(rid)
}

/// Values of the table's boolean flag columns for one row, in column order.
/// A `true` flag becomes a positive-polarity control on that column's ancilla.
pub fn control_flags(table: &Table, rid: usize) -> Vec<(String, bool)> {
    table
        .columns
        .iter()
        .enumerate()
        .filter(|(_, c)| c.ty.is_flag())
        .map(|(i, c)| (c.name.clone(), table.encoded(rid, i) == Some(1)))
        .collect()
}
