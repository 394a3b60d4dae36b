use std::path::Path;
use std::process::{Command, Output};

use crystal_forge::io;
use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_crystal-forge"));
    cmd.env_remove("CRYSTAL_FORGE_N");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn split_model_has_zero_invariants() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    let inv = dir.path().join("inv.json");
    let out =
        run(&["gen", "mu-ordinary", "--p", "3", "--f", "3", "--N", "8", "--h", "4", "--d", "1,2,4", "-o", path(&m)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["invariants", path(&m), "-o", path(&inv)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = read(&inv);
    assert_eq!(doc["kind"], "invariants");
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["w"], "0");
    assert_eq!(doc["ha_total"], "0");
    for row in doc["h"].as_array().unwrap() {
        for sec in row.as_array().unwrap() {
            assert_eq!(sec["valuation"], "0");
        }
    }
}

#[test]
fn stored_filtration_round_trips_through_invariants() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    let fil = dir.path().join("f.json");
    assert!(run(&[
        "gen",
        "random",
        "--p",
        "2",
        "--f",
        "2",
        "--N",
        "10",
        "--h",
        "3",
        "--d",
        "1,2",
        "--seed",
        "4",
        "-o",
        path(&m)
    ])
    .status
    .success());
    assert!(run(&["filtration", path(&m), "-o", path(&fil)]).status.success());
    let built = run(&["invariants", path(&m)]);
    let stored = run(&["invariants", path(&m), "--filtration", path(&fil)]);
    assert!(built.status.success() && stored.status.success());
    assert_eq!(built.stdout, stored.stdout);
}

#[test]
fn dual_twice_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    let d1 = dir.path().join("d1.json");
    let d2 = dir.path().join("d2.json");
    assert!(run(&[
        "gen",
        "random",
        "--p",
        "3",
        "--f",
        "2",
        "--N",
        "9",
        "--h",
        "3",
        "--d",
        "2,1",
        "--seed",
        "11",
        "-o",
        path(&m)
    ])
    .status
    .success());
    assert!(run(&["dual", path(&m), "-o", path(&d1)]).status.success());
    assert!(run(&["dual", path(&d1), "-o", path(&d2)]).status.success());
    // Hodge bases are re-completed on parsing, so compare those by span.
    let a = io::module_from_json(&read(&m)).unwrap();
    let b = io::module_from_json(&read(&d2)).unwrap();
    assert_eq!(a.d(), b.d());
    for i in 0..a.f() {
        assert_eq!(a.verschiebung(i), b.verschiebung(i));
        assert_eq!(a.frobenius(i), b.frobenius(i));
        assert!(a.hodge(i).same_span(b.hodge(i)));
    }
}

#[test]
fn hasse_chain_quotient_satisfies_degree_theorem() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    let q = dir.path().join("q.json");
    let out = run(&[
        "gen",
        "hasse-chain",
        "--p",
        "3",
        "--f",
        "2",
        "--N",
        "40",
        "--c",
        "1,2;2,1",
        "--quotient",
        path(&q),
        "-o",
        path(&m),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["canonical", path(&m), path(&q)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["kind"], "degrees");
}

#[test]
fn classical_recipe_reports_hasse_valuation() {
    let out = bin().args(["gen", "classical", "--p", "5", "--c", "2"]).env("CRYSTAL_FORGE_N", "10").output().unwrap();
    assert!(out.status.success());
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    std::fs::write(&m, &out.stdout).unwrap();
    let out = run(&["invariants", path(&m), "--format", "table"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("v(Ha) = 1/5"), "{text}");
}

#[test]
fn fuzz_is_reproducible() {
    let a = run(&["fuzz", "--count", "12", "--seed", "3"]);
    let b = run(&["fuzz", "--count", "12", "--seed", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let doc: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["link"]["passed"], 12);
    assert_eq!(doc["duality"]["passed"], 12);
}

#[test]
fn malformed_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("bad.json");
    std::fs::write(&m, r#"{"schema": "crystal-forge/1", "kind": "module", "p": 3}"#).unwrap();
    let out = run(&["validate", path(&m)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("$."));
}

#[test]
fn invalid_datum_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    assert!(run(&["gen", "mu-ordinary", "--p", "3", "--N", "6", "--h", "2", "--d", "1", "-o", path(&m)])
        .status
        .success());
    let mut doc = read(&m);
    doc["V"][0][1][1] = serde_json::json!({"prec": 6, "terms": [{"e": 0, "c": [1]}]});
    std::fs::write(&m, doc.to_string()).unwrap();
    let out = run(&["validate", path(&m)]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}
