use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ecqp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ecqp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).expect("valid JSON on stdout")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SCALAR: &str = r#"{"n":1,"m":1,"A":[[-1.0]],"b":[1.0],"ellipsoids":[{"F":[[1.0]],"g":[0.0]}]}"#;

#[test]
fn round_scalar_instance() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "inst.json", SCALAR);
    let cert = dir.path().join("cert.json");
    let o = ecqp(&["round", "--in", &inst, "--out", cert.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(cert).unwrap()).unwrap();
    assert!((v["f_x"].as_f64().unwrap() + 3.0).abs() < 1e-6);
    assert_eq!(v["ratio"].as_f64(), Some(1.0));
}

#[test]
fn crossover_is_323() {
    let o = ecqp(&["crossover", "--mu", "m-plus-1"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["crossover"].as_u64(), Some(323));
}

#[test]
fn bounds_table_r0_column() {
    let o = ecqp(&["bounds-table", "--m", "1..10", "--gamma", "0"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 11);
    assert!(lines[0].starts_with("m,r0,"));
    let r0: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(r0, ["1", "2", "2", "2", "3", "3", "3", "3", "4", "4"]);
}

#[test]
fn gen_round_verify_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    let inst = inst.to_str().unwrap();
    let gen = ecqp(&["gen", "--seed", "7", "--n", "4", "--m", "3", "--gamma-max", "0.5", "--out", inst]);
    assert!(gen.status.success());
    let again = ecqp(&["gen", "--seed", "7", "--n", "4", "--m", "3", "--gamma-max", "0.5"]);
    assert_eq!(stdout(&again), std::fs::read_to_string(inst).unwrap());

    for cmd in ["solve", "round", "verify"] {
        let a = ecqp(&[cmd, "--in", inst]);
        let b = ecqp(&[cmd, "--in", inst]);
        assert!(a.status.success(), "{cmd}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{cmd} output differs between runs");
    }
    let rep = json(&ecqp(&["verify", "--in", inst]));
    assert_eq!(rep["pass"], Value::Bool(true));
    assert!(rep.get("times").is_none());
    assert!(rep["checks"].as_array().unwrap().iter().any(|c| c["name"] == "oracle_below_rounded"));
}

#[test]
fn floats_use_seventeen_digits() {
    let o = ecqp(&["gen", "--seed", "1", "--n", "2", "--m", "1"]);
    let text = stdout(&o);
    assert!(text.contains("e0") || text.contains("e-"), "{text}");
    assert!(!text.contains(".0,"));
}

#[test]
fn asqp_random_instance_meets_guarantee() {
    let o = ecqp(&["asqp", "--n", "3", "--seed", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["guarantee_holds"], Value::Bool(true));
    assert!(v["row_sum_error"].as_f64().unwrap() < 1e-8);
}

#[test]
fn bench_keeps_seed_order() {
    let o = Command::new(env!("CARGO_BIN_EXE_ecqp"))
        .args(["bench", "--seed", "10", "--count", "4", "--n", "3", "--m", "2"])
        .env("ECQP_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    let seeds: Vec<u64> = v["runs"].as_array().unwrap().iter().map(|r| r["seed"].as_u64().unwrap()).collect();
    assert_eq!(seeds, [10, 11, 12, 13]);
    assert_eq!(v["threads"].as_u64(), Some(2));
    assert_eq!(v["passed"].as_u64(), Some(4));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // unreadable input → 2
    assert_eq!(ecqp(&["round", "--in", "/nonexistent.json"]).status.code(), Some(2));
    // malformed JSON → 2
    let bad = write(dir.path(), "bad.json", "{\"n\":1}");
    assert_eq!(ecqp(&["round", "--in", &bad]).status.code(), Some(2));
    // origin outside the feasible set (‖g‖ = 2) → input error 2
    let outside = write(
        dir.path(),
        "outside.json",
        r#"{"n":1,"m":1,"A":[[1.0]],"b":[0.0],"ellipsoids":[{"F":[[1.0]],"g":[2.0]}]}"#,
    );
    assert_eq!(ecqp(&["round", "--in", &outside]).status.code(), Some(2));
    // nonsensical tolerance → 2
    let inst = write(dir.path(), "inst.json", SCALAR);
    assert_eq!(ecqp(&["solve", "--in", &inst, "--gap-tol", "-1"]).status.code(), Some(2));
    // two interior-point iterations cannot converge → 3
    assert_eq!(ecqp(&["solve", "--in", &inst, "--max-iter", "2"]).status.code(), Some(3));
    assert_eq!(ecqp(&["round", "--in", &inst, "--max-iter", "2"]).status.code(), Some(3));
    // bad ECQP_THREADS → 2
    let o = Command::new(env!("CARGO_BIN_EXE_ecqp"))
        .args(["bench", "--count", "1"])
        .env("ECQP_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
