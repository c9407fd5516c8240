use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::table::{ColumnData, ColumnDef, Table};
use super::{ColumnType, StorageError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexDef {
    pub table: String,
    pub columns: Vec<String>,
}

/// All tables of a database plus declared indexes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Catalog {
    tables: BTreeMap<String, Table>,
    pub indexes: Vec<IndexDef>,
}

#[derive(Serialize, Deserialize)]
struct CatalogFile {
    tables: Vec<TableEntry>,
    indexes: Vec<IndexDef>,
}

#[derive(Serialize, Deserialize)]
struct TableEntry {
    name: String,
    row_count: usize,
    columns: Vec<ColumnDef>,
}

impl Catalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn create_table(&mut self, table: Table) -> Result<(), StorageError> {
        let key = table.name.to_ascii_lowercase();
        if self.tables.contains_key(&key) {
            return Err(StorageError::DuplicateTable(table.name));
        }
        self.tables.insert(key, table);
        Ok(())
    }

    pub fn replace_table(&mut self, table: Table) {
        self.tables.insert(table.name.to_ascii_lowercase(), table);
    }

    pub fn table(&self, name: &str) -> Result<&Table, StorageError> {
        self.tables
            .get(&name.to_ascii_lowercase())
            .ok_or_else(|| StorageError::UnknownTable(name.to_string()))
    }

    pub fn table_mut(&mut self, name: &str) -> Result<&mut Table, StorageError> {
        self.tables
            .get_mut(&name.to_ascii_lowercase())
            .ok_or_else(|| StorageError::UnknownTable(name.to_string()))
    }

    pub fn tables(&self) -> impl Iterator<Item = &Table> {
        self.tables.values()
    }

    pub fn add_index(&mut self, def: IndexDef) -> Result<(), StorageError> {
        let t = self.table(&def.table)?;
        for c in &def.columns {
            t.column_index(c)?;
        }
        if !self.indexes.contains(&def) {
            self.indexes.push(def);
        }
        Ok(())
    }

    /// Writes `catalog.json` plus one little-endian binary file per column.
    pub fn save(&self, dir: &Path) -> Result<(), StorageError> {
        fs::create_dir_all(dir)?;
        let mut entries = Vec::new();
        for t in self.tables.values() {
            for (def, data) in t.columns.iter().zip(t.data()) {
                fs::write(
                    dir.join(column_file(&t.name, &def.name)),
                    encode_column(def.ty, data),
                )?;
            }
            entries.push(TableEntry {
                name: t.name.clone(),
                row_count: t.row_count(),
                columns: t.columns.clone(),
            });
        }
        let file = CatalogFile {
            tables: entries,
            indexes: self.indexes.clone(),
        };
        let json =
            serde_json::to_string_pretty(&file).map_err(|e| StorageError::Io(e.to_string()))?;
        fs::write(dir.join("catalog.json"), json)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, StorageError> {
        let text = fs::read_to_string(dir.join("catalog.json"))?;
        let file: CatalogFile =
            serde_json::from_str(&text).map_err(|e| StorageError::ParseError {
                line: e.line(),
                message: e.to_string(),
            })?;
        let mut cat = Catalog::new();
        for entry in file.tables {
            let mut cols = Vec::new();
            for def in entry.columns {
                let bytes = fs::read(dir.join(column_file(&entry.name, &def.name)))?;
                let data = decode_column(def.ty, &bytes, entry.row_count)?;
                cols.push((def, data));
            }
            cat.create_table(Table::from_columns(&entry.name, cols)?)?;
        }
        cat.indexes = file.indexes;
        Ok(cat)
    }
}

fn column_file(table: &str, column: &str) -> String {
    format!("{table}.{column}.col")
}

fn uint_width(bits: u8) -> usize {
    match bits {
        0..=8 => 1,
        9..=16 => 2,
        17..=32 => 4,
        _ => 8,
    }
}

fn encode_column(ty: ColumnType, data: &ColumnData) -> Vec<u8> {
    let mut out = Vec::new();
    match (ty, data) {
        (ColumnType::UInt { bits }, ColumnData::UInt(v)) => {
            let w = uint_width(bits);
            for x in v {
                out.extend_from_slice(&x.to_le_bytes()[..w]);
            }
        }
        (_, ColumnData::Real(v)) => v
            .iter()
            .for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        (_, ColumnData::Vector(v)) => v
            .iter()
            .flatten()
            .for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        (_, ColumnData::Text(v)) => {
            for s in v {
                out.extend_from_slice(&(s.len() as u32).to_le_bytes());
                out.extend_from_slice(s.as_bytes());
            }
        }
        _ => unreachable!("column data matches its type"),
    }
    out
}

fn decode_column(ty: ColumnType, bytes: &[u8], rows: usize) -> Result<ColumnData, StorageError> {
    let short = || StorageError::Io("column file truncated".into());
    let f64_at = |i: usize| -> Result<f64, StorageError> {
        let b = bytes.get(i * 8..i * 8 + 8).ok_or_else(short)?;
        Ok(f64::from_le_bytes(b.try_into().unwrap()))
    };
    Ok(match ty {
        ColumnType::UInt { bits } => {
            let w = uint_width(bits);
            let mut v = Vec::with_capacity(rows);
            for r in 0..rows {
                let b = bytes.get(r * w..r * w + w).ok_or_else(short)?;
                let mut buf = [0u8; 8];
                buf[..w].copy_from_slice(b);
                v.push(u64::from_le_bytes(buf));
            }
            ColumnData::UInt(v)
        }
        ColumnType::Real => ColumnData::Real((0..rows).map(f64_at).collect::<Result<_, _>>()?),
        ColumnType::Vector { dim } => ColumnData::Vector(
            (0..rows)
                .map(|r| (0..dim).map(|j| f64_at(r * dim + j)).collect())
                .collect::<Result<_, _>>()?,
        ),
        ColumnType::Text => {
            let mut v = Vec::with_capacity(rows);
            let mut pos = 0;
            for _ in 0..rows {
                let len = u32::from_le_bytes(
                    bytes
                        .get(pos..pos + 4)
                        .ok_or_else(short)?
                        .try_into()
                        .unwrap(),
                ) as usize;
                pos += 4;
                let s = bytes.get(pos..pos + len).ok_or_else(short)?;
                v.push(String::from_utf8(s.to_vec()).map_err(|e| StorageError::Io(e.to_string()))?);
                pos += len;
            }
            ColumnData::Text(v)
        }
    })
}
