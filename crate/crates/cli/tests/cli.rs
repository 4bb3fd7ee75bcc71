use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn zkpol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zkpol")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is json")
}

#[test]
fn check_exit_codes_follow_verdict() {
    for (name, want) in [
        ("ev_compliant.json", 0),
        ("ev_boundary.json", 0),
        ("ev_noncompliant.json", 1),
        ("tax_compliant.json", 0),
        ("tax_noncompliant.json", 1),
    ] {
        let o = zkpol(&["check", fixture(name).to_str().unwrap()]);
        assert_eq!(code(&o), want, "{name}: {}", String::from_utf8_lossy(&o.stderr));
        let v = stdout_json(&o);
        assert_eq!(v["satisfied"], Value::Bool(want == 0));
        assert_eq!(v["oracle"], Value::Bool(want == 0));
        assert!(v["n_mul"].as_u64().unwrap() > 0);
    }
}

#[test]
fn oracle_matches_check() {
    for name in ["ev_compliant.json", "ev_noncompliant.json", "tax_compliant.json", "tax_noncompliant.json"] {
        let path = fixture(name);
        let a = zkpol(&["oracle", path.to_str().unwrap()]);
        let b = zkpol(&["check", path.to_str().unwrap()]);
        assert_eq!(code(&a), code(&b), "{name}");
        assert!(stdout_json(&a)["detail"]["tot"].is_string());
    }
}

#[test]
fn bad_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let truncated = dir.path().join("t.json");
    std::fs::write(&truncated, "{\"kind\":").unwrap();
    for args in [
        vec!["check", "/definitely/not/here.json"],
        vec!["check", truncated.to_str().unwrap()],
        vec!["oracle", truncated.to_str().unwrap()],
        vec!["frobnicate"],
        vec!["cost", "--kind", "ev", "--n-traj", "8"],
        vec!["cost", "--kind", "ev", "--n-traj", "8", "--n-tri", "2"],
        vec!["session", "--scenario", "honest", "--tamper", "flip-sig:0"],
        vec!["session", "--scenario", "corrupt-prover", "--tamper", "nonsense"],
        vec!["gen", truncated.to_str().unwrap()],
    ] {
        let o = zkpol(&args);
        assert_eq!(code(&o), 2, "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn schema_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("ev_compliant.json")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["trail"][0] = Value::String("oops".into());
    let path = dir.path().join("bad.json");
    std::fs::write(&path, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    let o = zkpol(&["check", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("/trail/0"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn tampered_hash_is_unsatisfied_not_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("ev_compliant.json")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    let h: u128 = v["h_ex"].as_str().unwrap().parse().unwrap();
    v["h_ex"] = Value::String((h ^ 1).to_string());
    let path = dir.path().join("h.json");
    std::fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
    let o = zkpol(&["check", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["hash_matches"], Value::Bool(false));
}

#[test]
fn fuzz_finds_no_violations() {
    for name in ["ev_compliant.json", "ev_noncompliant.json", "tax_compliant.json", "tax_noncompliant.json"] {
        let o = zkpol(&["fuzz", fixture(name).to_str().unwrap(), "--mutations", "60", "--seed", "7"]);
        assert_eq!(code(&o), 0, "{name}: {}", String::from_utf8_lossy(&o.stdout));
        let v = stdout_json(&o);
        assert_eq!(v["violations"].as_array().unwrap().len(), 0);
        let total = ["accepted", "rejected", "invalid"].iter().map(|k| v[k].as_u64().unwrap()).sum::<u64>();
        assert_eq!(total, 60);
    }
}

#[test]
fn cost_is_deterministic_csv() {
    let args = ["cost", "--kind", "tax", "--n-traj", "8,16", "--n-tri", "2,4", "--csv"];
    let a = zkpol(&args);
    let b = zkpol(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "kind,n_traj,n_geo,n_mul,n_add,n_assert,n_prover_inputs");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("tax,8,2,"));
}

#[test]
fn sessions_agree_with_ideal_outputs() {
    let ev = fixture("ev_compliant.json");
    let bad = fixture("ev_noncompliant.json");
    let cases: Vec<Vec<&str>> = vec![
        vec!["session", "--scenario", "honest"],
        vec!["session", "--scenario", "honest", "--instance", ev.to_str().unwrap()],
        vec!["session", "--scenario", "honest", "--instance", bad.to_str().unwrap()],
        vec!["session", "--scenario", "corrupt-prover", "--instance", ev.to_str().unwrap()],
        vec!["session", "--scenario", "corrupt-prover", "--tamper", "flip-sig:9"],
        vec!["session", "--scenario", "corrupt-prover", "--tamper", "bump-hash"],
        vec![
            "session",
            "--scenario",
            "corrupt-prover",
            "--instance",
            bad.to_str().unwrap(),
            "--tamper",
            "force-output:ok",
        ],
        vec!["session", "--scenario", "corrupt-verifier"],
        vec!["session", "--scenario", "corrupt-verifier", "--tamper", "drop:prove-query"],
    ];
    for args in cases {
        let o = zkpol(&args);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let v = stdout_json(&o);
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["audit_violations"], 0);
    }
}

#[test]
fn session_outputs_by_scenario() {
    let run = |args: &[&str]| stdout_json(&zkpol(args))["outputs"].clone();
    let ev = fixture("ev_compliant.json");
    let honest = run(&["session", "--scenario", "honest", "--instance", ev.to_str().unwrap()]);
    assert_eq!(honest["verifier"], "ok");
    assert_eq!(honest["prover"], "ok");
    let sub = run(&["session", "--scenario", "corrupt-prover", "--instance", ev.to_str().unwrap()]);
    assert_eq!(sub["verifier"], "not_ok");
    let mismatch = run(&["session", "--scenario", "corrupt-verifier", "--instance", ev.to_str().unwrap()]);
    assert_eq!(mismatch["verifier"], "not_ok");
}

#[test]
fn session_is_reproducible_and_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.json");
    let a = zkpol(&["session", "--scenario", "honest", "--seed", "5", "-o", p.to_str().unwrap()]);
    assert_eq!(code(&a), 0);
    assert!(a.stdout.is_empty());
    let b = zkpol(&["session", "--scenario", "honest", "--seed", "5"]);
    let written = std::fs::read_to_string(&p).unwrap();
    assert_eq!(written.trim_end(), String::from_utf8(b.stdout).unwrap().trim_end());
}

#[test]
fn gen_reproduces_checked_in_fixtures() {
    for name in ["ev_compliant", "ev_noncompliant", "ev_boundary", "tax_compliant", "tax_noncompliant"] {
        let spec = fixture(&format!("specs/{name}.json"));
        let o = zkpol(&["gen", spec.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{name}");
        let want: Value =
            serde_json::from_str(&std::fs::read_to_string(fixture(&format!("{name}.json"))).unwrap()).unwrap();
        assert_eq!(stdout_json(&o), want, "{name}");
    }
}

#[test]
fn library_entry_point_matches_binary() {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let c = zkpol_cli::run(
        ["zkpol", "cost", "--kind", "ev", "--n-traj", "4", "--n-circ", "1", "--csv"],
        &mut out,
        &mut err,
    );
    assert_eq!(c, zkpol_cli::EXIT_OK);
    let bin = zkpol(&["cost", "--kind", "ev", "--n-traj", "4", "--n-circ", "1", "--csv"]);
    assert_eq!(out, bin.stdout);
    let mut out = Vec::new();
    assert_eq!(zkpol_cli::run(["zkpol", "--help"], &mut out, &mut err), zkpol_cli::EXIT_OK);
    assert!(String::from_utf8(out).unwrap().contains("Usage"));
}
