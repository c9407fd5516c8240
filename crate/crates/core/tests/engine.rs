use std::fs;

use qutedb_core::optimizer::PlanMode;
use qutedb_core::{Config, ConfigError, Engine, EngineError, Outcome, Quality, Realization, Value};

const SCHEMA: &str = "
CREATE TABLE t (a UINT(8), b UINT(4), name TEXT);
INSERT INTO t VALUES (3, 1, 'x'), (7, 2, 'y'), (3, 5, 'z'), (9, 1, 'w'), (0, 0, 'v');
";

fn engine(mode: PlanMode) -> Engine {
    let mut cfg = Config {
        seed: 11,
        ..Config::default()
    };
    cfg.policy.mode = mode;
    let mut e = Engine::new(cfg).unwrap();
    e.run_script(SCHEMA).unwrap();
    e
}

fn rids(e: &mut Engine, sql: &str) -> Vec<u64> {
    let rs = e.query(sql).unwrap();
    let mut v: Vec<u64> = rs
        .rows
        .iter()
        .map(|r| match r[0] {
            Value::UInt(x) => x,
            ref other => panic!("not a rid: {other:?}"),
        })
        .collect();
    v.sort();
    v
}

#[test]
fn filters_agree_across_modes() {
    for sql in [
        "SELECT RID FROM t WHERE a = 3",
        "SELECT RID FROM t WHERE b < 2 OR name = 'y'",
        "SELECT RID FROM t WHERE NOT a BETWEEN 1 AND 8",
    ] {
        let q = rids(&mut engine(PlanMode::ForceQuantum), sql);
        let c = rids(&mut engine(PlanMode::ForceClassical), sql);
        assert_eq!(q, c, "{sql}");
    }
    assert_eq!(
        rids(&mut engine(PlanMode::Auto), "SELECT RID FROM t WHERE a = 3"),
        vec![0, 2]
    );
}

#[test]
fn forced_quantum_filter_is_traced_as_quantum() {
    let mut e = engine(PlanMode::ForceQuantum);
    let rs = e.query("SELECT RID FROM t WHERE a = 7").unwrap();
    assert_eq!(rs.quality, Quality::Exact);
    assert!(rs
        .trace
        .iter()
        .any(|t| t.realization == Realization::Quantum && t.shots > 0));
}

#[test]
fn insert_with_column_subset_uses_defaults() {
    let mut e = engine(PlanMode::ForceClassical);
    e.run_script("INSERT INTO t (name, a) VALUES ('new', 42);")
        .unwrap();
    let rs = e.query("SELECT * FROM t WHERE a = 42").unwrap();
    assert_eq!(
        rs.rows,
        vec![vec![
            Value::UInt(42),
            Value::UInt(0),
            Value::Text("new".into())
        ]]
    );
}

#[test]
fn count_is_approximate_with_bound() {
    let mut cfg = Config {
        seed: 3,
        ..Config::default()
    };
    cfg.device = Some(qutedb_core::DeviceModel::noiseless());
    cfg.policy.mode = PlanMode::ForceQuantum;
    let mut e = Engine::new(cfg).unwrap();
    e.run_script(SCHEMA).unwrap();
    let rs = e.query("SELECT COUNT(*) FROM t WHERE b = 1").unwrap();
    let Quality::Approximate { bound } = rs.quality else {
        panic!("expected approximate, got {:?}", rs.quality)
    };
    let v = rs.rows[0][0].as_f64().unwrap();
    assert!((v - 2.0).abs() <= bound, "{v} ± {bound}");
}

#[test]
fn explain_and_explain_analyze() {
    let mut e = engine(PlanMode::Auto);
    let out = e
        .run_script(
            "EXPLAIN SELECT RID FROM t WHERE a = 3; EXPLAIN ANALYZE SELECT RID FROM t WHERE a = 3;",
        )
        .unwrap();
    match &out[0] {
        Outcome::Explain {
            plan,
            analyzed: None,
        } => assert!(plan.contains("Filter") && plan.contains("realization=")),
        o => panic!("unexpected {o:?}"),
    }
    match &out[1] {
        Outcome::Explain {
            analyzed: Some(rs), ..
        } => assert_eq!(rs.rows.len(), 2),
        o => panic!("unexpected {o:?}"),
    }
    assert_eq!(
        e.explain("SELECT RID FROM t WHERE a = 3")
            .unwrap()
            .lines()
            .count(),
        3
    );
}

#[test]
fn same_seed_same_results() {
    let run = || {
        let mut e = engine(PlanMode::ForceQuantum);
        let rs = e.query("SELECT RID FROM t WHERE b = 1").unwrap();
        (
            rs.rows,
            rs.trace
                .iter()
                .map(|t| (t.shots, t.rounds))
                .collect::<Vec<_>>(),
        )
    };
    assert_eq!(run(), run());
}

#[test]
fn copy_resolves_against_base_dir() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("rows.csv"), "a,b,name\n1,2,p\n4,4,q\n").unwrap();
    let mut e = Engine::new(Config::default()).unwrap();
    e.set_base_dir(dir.path());
    let out = e
        .run_script("CREATE TABLE t (a UINT(8), b UINT(4), name TEXT); COPY t FROM 'rows.csv';")
        .unwrap();
    assert!(matches!(&out[1], Outcome::Done(m) if m == "COPY 2"));
    assert_eq!(
        e.query("SELECT RID FROM t WHERE name = 'q'").unwrap().rows,
        vec![vec![Value::UInt(1)]]
    );
}

#[test]
fn statement_errors() {
    let mut e = engine(PlanMode::Auto);
    assert!(matches!(
        e.query("SELECT RID FROM missing WHERE a = 1"),
        Err(EngineError::Sql(_) | EngineError::Storage(_))
    ));
    assert!(matches!(
        e.run_script("SELEC RID FROM t;"),
        Err(EngineError::Sql(_))
    ));
    assert!(e.run_script("INSERT INTO t VALUES (1, 2);").is_err());
    assert!(e.run_script("CREATE TABLE t (a UINT(8));").is_err());
    // the script is parsed up front, so nothing from a malformed script runs
    assert!(e
        .run_script("CREATE TABLE u (a UINT(8)); SELECT FROM;")
        .is_err());
    assert!(e.catalog.table("u").is_err());
}

#[test]
fn config_loading() {
    let dir = tempfile::tempdir().unwrap();
    let device = qutedb_core::DeviceModel {
        qubit_cap: 20,
        ..Default::default()
    };
    fs::write(
        dir.path().join("dev.json"),
        serde_json::to_string(&device).unwrap(),
    )
    .unwrap();
    fs::write(
        dir.path().join("cfg.json"),
        r#"{"device_path": "dev.json", "shots": 300, "seed": 5}"#,
    )
    .unwrap();
    let cfg = Config::load(&dir.path().join("cfg.json")).unwrap();
    assert_eq!(cfg.shots, 300);
    assert_eq!(cfg.resolve_device().unwrap().qubit_cap, 20);
    let e = Engine::new(cfg).unwrap();
    assert_eq!(e.device().qubit_cap, 20);

    assert!(matches!(
        Config::from_json(r#"{"shots": 0}"#),
        Err(ConfigError::Invalid(_))
    ));
    assert!(matches!(
        Config::from_json(r#"{"shot": 10}"#),
        Err(ConfigError::Parse(_))
    ));
    assert!(matches!(
        Config::load(&dir.path().join("absent.json")),
        Err(ConfigError::Io { .. })
    ));
    let mut dev = serde_json::to_value(qutedb_core::DeviceModel::default()).unwrap();
    dev["t2_eff_ns"] = serde_json::Value::Null;
    let inline =
        Config::from_json(&serde_json::json!({"device": dev, "qubit_cap": 12}).to_string())
            .unwrap();
    let d = inline.resolve_device().unwrap();
    assert!(d.t2_eff_ns.is_infinite());
    assert_eq!(d.qubit_cap, 12);
}

#[test]
fn config_roundtrips_through_json() {
    let cfg = Config::default();
    let text = serde_json::to_string_pretty(&cfg).unwrap();
    assert_eq!(Config::from_json(&text).unwrap(), cfg);
}
