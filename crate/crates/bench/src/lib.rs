//! Shared fixtures for the criterion benches in `benches/`.

use qutedb_core::optimizer::PlanMode;
use qutedb_core::{ColumnDef, ColumnType, Config, Engine, Table, Value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` rows of `(a UINT(8), b UINT(4), v UINT(8))` with uniform values.
pub fn random_rows(n: usize, seed: u64) -> Vec<[u64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            [
                rng.gen_range(0..256),
                rng.gen_range(0..16),
                rng.gen_range(0..256),
            ]
        })
        .collect()
}

pub fn random_table(n: usize, seed: u64) -> Table {
    let cols = vec![
        ColumnDef::new("a", ColumnType::UInt { bits: 8 }),
        ColumnDef::new("b", ColumnType::UInt { bits: 4 }),
        ColumnDef::new("v", ColumnType::UInt { bits: 8 }),
    ];
    let mut t = Table::new("r", cols).expect("valid schema");
    t.insert_rows(
        random_rows(n, seed)
            .iter()
            .map(|r| r.iter().map(|&x| Value::UInt(x)).collect())
            .collect(),
    )
    .expect("rows fit the schema");
    t
}

/// Engine holding `r` with `n` random rows, planned under `mode`.
pub fn engine(n: usize, mode: PlanMode, noisy: bool, shots: usize) -> Engine {
    let mut cfg = Config {
        noisy,
        shots,
        seed: 1,
        ..Config::default()
    };
    cfg.policy.mode = mode;
    let mut e = Engine::new(cfg).expect("default config is valid");
    let rows: Vec<String> = random_rows(n, 7)
        .iter()
        .map(|r| format!("({}, {}, {})", r[0], r[1], r[2]))
        .collect();
    e.run_script(&format!(
        "CREATE TABLE r (a UINT(8), b UINT(4), v UINT(8)); INSERT INTO r VALUES {};",
        rows.join(", ")
    ))
    .expect("fixture script");
    e
}
