use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_streamspan"));
    c.env_remove("STREAMSPAN_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bs_on_a_cycle_stream() {
    let dir = tempfile::tempdir().unwrap();
    let stream = dir.path().join("c50.stream");
    assert!(run(&["gen", "cycle:50", "--deletion-ratio", "0.2", "--seed", "1", "--out", path(&stream)]).status.success());
    let out = run(&["run", "--stream", path(&stream), "--algo", "bs", "--k", "2"]);
    assert!(out.status.success());
    let r = json(&out);
    assert_eq!(r["passes"], 2);
    assert_eq!(r["max_stretch"], 1);
    assert_eq!(r["verified"], true);
}

#[test]
fn recursive_kw_declares_table_bound() {
    let out = run(&["run", "--gen", "gnp:128:0.08", "--algo", "recursive-kw", "--k", "7", "--g", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["declared_bound"], 29.0);
}

#[test]
fn verify_rejects_foreign_edges() {
    let dir = tempfile::tempdir().unwrap();
    let stream = dir.path().join("c.stream");
    let spanner = dir.path().join("bad.txt");
    assert!(run(&["gen", "cycle:20", "--out", path(&stream)]).status.success());
    std::fs::write(&spanner, "n 20\n0 10\n").unwrap();
    let out = run(&["verify", "--stream", path(&stream), "--spanner", path(&spanner)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("subgraph violation"));
}

#[test]
fn verify_roundtrips_a_saved_report() {
    let dir = tempfile::tempdir().unwrap();
    let stream = dir.path().join("g.stream");
    let spanner = dir.path().join("h.txt");
    let report = dir.path().join("r.json");
    assert!(run(&["gen", "gnp:80:0.1", "--deletion-ratio", "0.3", "--seed", "4", "--out", path(&stream)]).status.success());
    let out = run(&[
        "run", "--stream", path(&stream), "--algo", "kw", "--k", "3", "--seed", "9",
        "--spanner-out", path(&spanner), "--report-out", path(&report),
    ]);
    assert!(out.status.success());
    let v = run(&["verify", "--stream", path(&stream), "--spanner", path(&spanner), "--report", path(&report)]);
    assert!(v.status.success());
    let (a, b) = (json(&out), json(&v));
    for key in ["max_stretch", "spanner_edges", "declared_bound", "verified"] {
        assert_eq!(a[key], b[key], "{key}");
    }
}

#[test]
fn reports_are_reproducible_and_env_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let stream = dir.path().join("g.stream");
    assert!(run(&["gen", "gnp:100:0.08", "--seed", "2", "--out", path(&stream)]).status.success());
    let args = ["run", "--stream", path(&stream), "--algo", "bs", "--k", "3"];
    let strip = |o: &Output| {
        let mut v = json(o);
        v["wall_ms"] = 0.into();
        v
    };
    let a = bin().args(args).env("STREAMSPAN_SEED", "17").output().unwrap();
    let b = bin().args(args).env("STREAMSPAN_SEED", "17").output().unwrap();
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(json(&a)["params"]["seed"], 17);
    let c = bin().args(args).arg("--seed").arg("3").env("STREAMSPAN_SEED", "17").output().unwrap();
    assert_eq!(json(&c)["params"]["seed"], 3);
}

#[test]
fn parameter_errors_exit_2() {
    assert_eq!(run(&["run", "--gen", "gnp:50:0.1", "--algo", "bs"]).status.code(), Some(2));
    assert_eq!(run(&["run", "--gen", "nope:5", "--algo", "sparsifier"]).status.code(), Some(2));
    assert_eq!(run(&["run", "--gen", "gnp:50:0.1", "--algo", "recursive-bs", "--k", "1", "--g", "1"]).status.code(), Some(2));
}

#[test]
fn bench_emits_fixed_columns() {
    let out = run(&["bench", "--algo", "bs,kw", "--gen", "gnp:40:0.15", "--k", "2", "--seeds", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    let cols = lines[0].split(',').count();
    assert!(lines.iter().all(|l| l.split(',').count() == cols));
    assert!(lines[1].starts_with("bs,gnp:40:0.15,40,"));
}

#[test]
fn simultaneous_protocols_run() {
    for args in [
        &["run", "--gen", "gnp:60:0.1", "--algo", "peeling", "--s", "3"][..],
        &["run", "--gen", "gnp:60:0.1", "--algo", "filtering", "--g", "2", "--regime", "ldd"][..],
        &["run", "--gen", "gnp:48:0.1", "--algo", "scm", "--alpha", "0.5", "--g", "2"][..],
    ] {
        let out = run(args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(json(&out)["verified"], true, "{args:?}");
    }
}
