//! End-to-end checks of the binary: exit codes, byte-stable output, and the
//! file-writing subcommands.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .display()
        .to_string()
}

fn plott(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plott"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn enumerate_is_byte_stable() {
    let a = plott(&["stable", "enumerate", &fixture("fix-b.json")]);
    let b = plott(&["stable", "enumerate", &fixture("fix-b.json")]);
    assert_eq!(exit_code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let doc = stdout_json(&a);
    assert_eq!(doc["result"]["count"], 4);
    assert_eq!(doc["status"], 0);
}

#[test]
fn check_exit_codes_follow_stability() {
    let stable = plott(&[
        "stable",
        "check",
        &fixture("fix-b.json"),
        "--system",
        "a,a',d",
    ]);
    assert_eq!(exit_code(&stable), 0);
    let unstable = plott(&[
        "stable",
        "check",
        &fixture("fix-b.json"),
        "--system",
        "a,a'",
    ]);
    assert_eq!(exit_code(&unstable), 1);
    let doc = stdout_json(&unstable);
    assert!(doc["result"]["blocking"]["names"]
        .as_array()
        .unwrap()
        .contains(&serde_json::json!("d")));
    // the empty system is checkable too
    let empty = plott(&["stable", "check", &fixture("fix-b.json"), "--system", ""]);
    assert_eq!(exit_code(&empty), 1);
}

#[test]
fn bad_input_is_exit_two() {
    // unknown contract name
    let unknown = plott(&[
        "stable",
        "check",
        &fixture("fix-b.json"),
        "--system",
        "nope",
    ]);
    assert_eq!(exit_code(&unknown), 2);
    // missing file
    let missing = plott(&["stable", "enumerate", "no-such-file.json"]);
    assert_eq!(exit_code(&missing), 2);
    // unknown flag (clap usage error)
    let flag = plott(&["stable", "enumerate", &fixture("fix-b.json"), "--bogus"]);
    assert_eq!(exit_code(&flag), 2);
}

#[test]
fn audit_reports_fix_b_monotonicity_failure() {
    let out = plott(&["cf", "audit", &fixture("fix-b.json"), "--agent", "m"]);
    // m is Plott, so the audit "all plott" property holds
    assert_eq!(exit_code(&out), 0);
    let doc = stdout_json(&out);
    let report = &doc["result"]["reports"][0];
    assert_eq!(report["plott"], true);
    assert_eq!(report["cardinally_monotone"], false);
    let witness = &report["witnesses"]["cardinal_monotonicity"];
    assert_eq!(witness["a"]["names"], serde_json::json!(["b", "c"]));
    assert_eq!(witness["b"]["names"], serde_json::json!(["a", "b", "c"]));
}

#[test]
fn audit_flags_non_plott_tables() {
    let out = plott(&["cf", "audit", &fixture("nonseq-quota2.json")]);
    // the witness CF is Plott, so exit 0 and quota 2
    assert_eq!(exit_code(&out), 0);
    let doc = stdout_json(&out);
    assert_eq!(doc["result"]["reports"][0]["quota"], 2);
}

#[test]
fn decompose_quota_worker() {
    let out = plott(&[
        "cf",
        "decompose",
        &fixture("fix-d.json"),
        "--agent",
        "w",
    ]);
    assert_eq!(exit_code(&out), 0);
    let doc = stdout_json(&out);
    let stages = doc["result"]["stages"].as_array().unwrap();
    assert_eq!(stages.len(), 2);
    for stage in stages {
        assert_eq!(stage.as_array().unwrap().len(), 3);
    }
}

#[test]
fn decompose_witness_returns_none_with_exit_one() {
    let out = plott(&[
        "cf",
        "decompose",
        &fixture("nonseq-quota2.json"),
        "--agent",
        "f",
    ]);
    assert_eq!(exit_code(&out), 1);
    let doc = stdout_json(&out);
    assert!(doc["result"]["stages"].is_null());
}

#[test]
fn solve_prints_the_trace() {
    let out = plott(&["stable", "solve", &fixture("fix-a.json")]);
    assert_eq!(exit_code(&out), 0);
    let doc = stdout_json(&out);
    assert_eq!(doc["result"]["system"]["names"], serde_json::json!(["l"]));
    let situations: Vec<i64> = doc["result"]["trace"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["situation"].as_i64().unwrap())
        .collect();
    assert_eq!(situations, vec![1, 2, 2, 0]);
    // an explicit order that changes nothing semantically
    let ordered = plott(&[
        "stable",
        "solve",
        &fixture("fix-a.json"),
        "--order",
        "w0,w",
    ]);
    assert_eq!(exit_code(&ordered), 0);
}

#[test]
fn compare_follows_the_firm_order() {
    let up = plott(&[
        "stable",
        "compare",
        &fixture("fix-b.json"),
        "--s",
        "a,b',c'",
        "--t",
        "a,a',d",
    ]);
    assert_eq!(exit_code(&up), 0);
    let down = plott(&[
        "stable",
        "compare",
        &fixture("fix-b.json"),
        "--s",
        "a,a',d",
        "--t",
        "a,b',c'",
    ]);
    assert_eq!(exit_code(&down), 1);
    let single = plott(&[
        "stable",
        "compare",
        &fixture("fix-b.json"),
        "--s",
        "a,b',c'",
        "--t",
        "a,a',d",
        "--agent",
        "m",
    ]);
    assert_eq!(exit_code(&single), 0);
}

#[test]
fn split_writes_round_trippable_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("fix-d-split.json");
    let map_path = dir.path().join("fix-d-map.json");
    let out = plott(&[
        "split",
        &fixture("fix-d.json"),
        "--out",
        out_path.to_str().unwrap(),
        "--map",
        map_path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);

    let original =
        plott_core::format::parse_instance(&std::fs::read_to_string(fixture("fix-d.json")).unwrap())
            .unwrap();
    let modified_text = std::fs::read_to_string(&out_path).unwrap();
    let modified = plott_core::format::parse_instance(&modified_text).unwrap();
    assert_eq!(modified.frame().n_contracts(), 7);
    let rebuilt = plott_core::format::parse_mapping(
        &std::fs::read_to_string(&map_path).unwrap(),
        &original,
        &modified,
    )
    .unwrap();
    // the rebuilt split projects the enumerated systems onto the originals
    let family = plott_core::enumerate_stable(&modified, &plott_core::Limits::default()).unwrap();
    for s in family {
        let projected = plott_core::project_system(&rebuilt, s);
        assert!(plott_core::is_stable(&original, projected).unwrap().stable);
    }
    // and the written instance is canonical
    assert_eq!(
        plott_core::format::serialize_problem(&modified),
        modified_text
    );
}

#[test]
fn verify_reports_all_flags_on_fix_d() {
    let out = plott(&["verify", &fixture("fix-d.json")]);
    assert_eq!(exit_code(&out), 0);
    let doc = stdout_json(&out);
    assert_eq!(doc["result"]["bijection_ok"], true);
    assert_eq!(doc["result"]["monotone_ok"], true);
    assert_eq!(doc["result"]["iso_ok"], true);
    assert_eq!(doc["result"]["pairing"].as_array().unwrap().len(), 2);
}

#[test]
fn split_fix_c_is_a_connectivity_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = plott(&[
        "split",
        &fixture("fix-c.json"),
        "--workers",
        "u,v",
        "--out",
        dir.path().join("o.json").to_str().unwrap(),
        "--map",
        dir.path().join("m.json").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("connectivity"), "{stderr}");
    // verify takes the same precondition
    let verify = plott(&["verify", &fixture("fix-c.json"), "--workers", "u,v"]);
    assert_eq!(exit_code(&verify), 2);
}

#[test]
fn env_limits_are_honored() {
    let out = Command::new(env!("CARGO_BIN_EXE_plott"))
        .args(["stable", "enumerate", &fixture("fix-b.json")])
        .env("PLOTT_ENUM_LIMIT", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("limit"), "{stderr}");
    let bad = Command::new(env!("CARGO_BIN_EXE_plott"))
        .args(["stable", "enumerate", &fixture("fix-b.json")])
        .env("PLOTT_ENUM_LIMIT", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn timing_goes_to_stderr_not_stdout() {
    let out = plott(&["stable", "enumerate", &fixture("fix-a.json")]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(!stdout.contains("elapsed"));
    assert!(stderr.contains("elapsed"));
}
