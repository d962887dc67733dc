use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BRANCHING: &str = r#"{"n":7,"dims":[2,2,2,2,2,2,2],"edges":[[7,5],[7,6],[6,3],[6,4],[3,1],[3,2]],"root":7}"#;

fn ttns(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ttns")).current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = ttns(dir, args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn setup() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("tree.json"), BRANCHING).unwrap();
    dir
}

fn bond_column(table: &str) -> Vec<&str> {
    table.lines().skip(1).map(|l| l.split_whitespace().collect::<Vec<_>>()).filter(|w| w.len() == 5).map(|w| w[2]).collect()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn gen_named_states() {
    let dir = setup();
    let d = dir.path();
    ok(d, &["gen", "ghz", "--tree", "tree.json", "--out", "ghz.json"]);
    let v = json(&d.join("ghz.json"));
    let re: Vec<f64> = serde_json::from_value(v["re"].clone()).unwrap();
    assert_eq!(re.len(), 128);
    assert!((re[0] - 0.5f64.sqrt()).abs() < 1e-15 && (re[127] - 0.5f64.sqrt()).abs() < 1e-15);
    assert_eq!(re.iter().filter(|x| **x != 0.0).count(), 2);

    let msg = ok(d, &["gen", "w", "--dims", "2,2,2", "--out", "w.bin"]);
    assert!(msg.contains("3 nonzero"), "{msg}");
}

#[test]
fn random_states_are_reproducible() {
    let dir = setup();
    let d = dir.path();
    ok(d, &["gen", "random", "--dims", "2,3,2", "--seed", "5", "--out", "a.bin"]);
    ok(d, &["gen", "random", "--dims", "2,3,2", "--seed", "5", "--out", "b.bin"]);
    ok(d, &["gen", "random", "--dims", "2,3,2", "--seed", "6", "--out", "c.bin"]);
    let a = fs::read(d.join("a.bin")).unwrap();
    assert_eq!(a, fs::read(d.join("b.bin")).unwrap());
    assert_ne!(a, fs::read(d.join("c.bin")).unwrap());
    assert_eq!(&a[..4], b"TTNS");
}

#[test]
fn gen_ground_writes_sidecars() {
    let dir = setup();
    let d = dir.path();
    fs::write(d.join("h.json"), r#"{"model":"heisenberg","tree":{"chain":2},"J":1,"h":0}"#).unwrap();
    ok(d, &["gen", "ground", "--spec", "h.json", "--out", "gs.bin"]);
    let meta = json(&d.join("gs.meta.json"));
    assert!((meta["energy"].as_f64().unwrap() + 0.75).abs() < 1e-10);
    assert_eq!(meta["degenerate"], Value::Bool(false));
    assert!(d.join("gs.tree.json").exists());
    // the sidecar tree is usable directly
    ok(d, &["profile", "--state", "gs.bin", "--tree", "gs.tree.json"]);
}

#[test]
fn decompose_reports_bond_dims() {
    let dir = setup();
    let d = dir.path();
    ok(d, &["gen", "ghz", "--tree", "tree.json", "--out", "ghz.bin"]);
    ok(d, &["gen", "product", "--tree", "tree.json", "--out", "prod.bin"]);
    let table = ok(d, &["decompose", "--state", "ghz.bin", "--tree", "tree.json", "--out", "ghz.ttns.json"]);
    let ms: Vec<&str> = bond_column(&table);
    assert_eq!(ms, ["2"; 6]);
    assert!(d.join("ghz.ttns.bin").exists());
    let table = ok(d, &["decompose", "--state", "prod.bin", "--tree", "tree.json", "--out", "prod.ttns.json"]);
    let ms: Vec<&str> = bond_column(&table);
    assert_eq!(ms, ["1"; 6]);
}

#[test]
fn corrupt_state_fails_with_offset() {
    let dir = setup();
    let d = dir.path();
    fs::write(d.join("bad.bin"), b"XXXX garbage").unwrap();
    let out = ttns(d, &["decompose", "--state", "bad.bin", "--tree", "tree.json", "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("byte 0"), "{err}");
}

#[test]
fn certify_ghz_and_noop_plan() {
    let dir = setup();
    let d = dir.path();
    ok(d, &["gen", "ghz", "--tree", "tree.json", "--out", "ghz.bin"]);
    ok(d, &["certify", "--state", "ghz.bin", "--tree", "tree.json", "--caps", "1", "--out", "r.json"]);
    let r = json(&d.join("r.json"));
    assert_eq!(r["verdict"], Value::Bool(true));
    let g = &r["global"];
    assert!((g["delta_projector"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((g["max_eps"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((g["sum_eps"].as_f64().unwrap() - 3.0).abs() < 1e-12);

    // no plan: nothing is truncated
    let stdout = ok(d, &["certify", "--state", "ghz.bin", "--tree", "tree.json"]);
    let r: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(r["global"]["delta_projector"].as_f64().unwrap(), 0.0);
    assert_eq!(r["global"]["sum_eps"].as_f64().unwrap(), 0.0);
}

#[test]
fn certify_batch_writes_one_report_per_seed() {
    let dir = setup();
    let d = dir.path();
    let out = ok(d, &["certify", "--seed-range", "3..6", "--sites", "6", "--caps", "2", "--out", "batch"]);
    assert!(out.contains("3/3 instances pass"), "{out}");
    for seed in 3..6 {
        let r = json(&d.join(format!("batch/report-{seed}.json")));
        assert_eq!(r["verdict"], Value::Bool(true));
    }
    let first = fs::read(d.join("batch/report-4.json")).unwrap();
    ok(d, &["certify", "--seed-range", "4..5", "--sites", "6", "--caps", "2", "--out", "again"]);
    assert_eq!(first, fs::read(d.join("again/report-4.json")).unwrap());
}

#[test]
fn profile_product_and_ghz() {
    let dir = setup();
    let d = dir.path();
    ok(d, &["gen", "product", "--tree", "tree.json", "--out", "prod.bin"]);
    ok(d, &["gen", "ghz", "--tree", "tree.json", "--out", "ghz.bin"]);
    ok(d, &["profile", "--state", "prod.bin", "--tree", "tree.json", "--out", "p.json"]);
    let p = json(&d.join("p.json"));
    for (_, s) in p["max_entropy"].as_object().unwrap() {
        assert!(s.as_f64().unwrap().abs() < 1e-12);
    }
    ok(d, &["profile", "--state", "ghz.bin", "--tree", "tree.json", "--out", "g.json"]);
    let g = json(&d.join("g.json"));
    for row in g["edges"].as_array().unwrap() {
        assert_eq!(row["min_bond_dim"], 2);
        assert_eq!(row["bracket_holds"], Value::Bool(true));
        for (_, s) in row["renyi"].as_object().unwrap() {
            assert!((s.as_f64().unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
        }
    }
}

#[test]
fn usage_errors_exit_two() {
    let dir = setup();
    let d = dir.path();
    assert_eq!(ttns(d, &["gen", "ghz", "--out", "x.bin"]).status.code(), Some(2));
    assert_eq!(ttns(d, &["certify", "--state", "missing.bin", "--tree", "tree.json"]).status.code(), Some(2));
    ok(d, &["gen", "ghz", "--tree", "tree.json", "--out", "ghz.bin"]);
    let out = ttns(d, &["certify", "--state", "ghz.bin", "--tree", "tree.json", "--alphas", "0,2"]);
    assert_eq!(out.status.code(), Some(2));
}
