//! End-to-end CLI checks over the bundled configuration files: worked
//! values on stdout reports, exit codes, and side-car CSV emission.

use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_smallcover")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run_json(args: &[&str]) -> (Value, i32) {
    let output = Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs");
    let stdout = String::from_utf8(output.stdout).expect("utf-8 report");
    let value = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (value, output.status.code().unwrap_or(-1))
}

#[test]
fn estimate_family_and_classes_report_worked_values() {
    let config = configs().join("i1.json");
    let config = config.to_str().unwrap();

    let (report, code) = run_json(&["estimate", "--config", config]);
    assert_eq!(code, 0);
    assert_eq!(report["report"]["S_T"], "19/16");

    let (report, code) = run_json(&["family", "--config", config]);
    assert_eq!(code, 0);
    assert_eq!(report["report"]["size"], 5);

    let (report, code) = run_json(&["classes", "--config", config]);
    assert_eq!(code, 0);
    assert_eq!(report["report"]["class_count"], 2);
    assert_eq!(report["report"]["bad_probability"], "1/16");
}

#[test]
fn witness_trace_matches_worked_instance() {
    let config = configs().join("i1_witness.json");
    let (report, code) = run_json(&["witness", "--config", config.to_str().unwrap()]);
    assert_eq!(code, 0);
    let body = &report["report"];
    assert_eq!(body["epsilon"], "0");
    assert_eq!(body["selected"]["witness"], serde_json::json!([3, 1]));
    assert_eq!(body["selected"]["W"], serde_json::json!([1]));
}

#[test]
fn verify_commands_pass() {
    let config = configs().join("i1.json");
    let (report, code) = run_json(&["verify", "--config", config.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(report["report"]["all_pass"], true);

    let config = configs().join("hypothesis_grade.json");
    let (report, code) = run_json(&[
        "verify",
        "--config",
        config.to_str().unwrap(),
        "--mode",
        "mc",
        "--seed",
        "17",
        "--samples",
        "2048",
    ]);
    assert_eq!(code, 0, "{report}");
    assert_eq!(report["report"]["hypotheses"]["all"], true);
}

#[test]
fn exit_codes_follow_the_contract() {
    let config = configs().join("i1.json");
    // exact enumeration blocked by a tiny budget: exit 3, diagnostic names
    // the state count
    let (report, code) = run_json(&[
        "estimate",
        "--config",
        config.to_str().unwrap(),
        "--budget",
        "4",
    ]);
    assert_eq!(code, 3);
    assert_eq!(report["error"]["kind"], "budget");

    // malformed config: exit 2 with a machine-readable diagnostic
    let tmp = std::env::temp_dir().join(format!("smallcover-cli-{}.json", std::process::id()));
    std::fs::write(&tmp, r#"{ "instance": { "d": 1 } }"#).unwrap();
    let (report, code) = run_json(&["estimate", "--config", tmp.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(report["error"]["kind"], "config");
    std::fs::remove_file(&tmp).ok();
}

#[test]
fn out_flag_writes_report_and_csv_sidecar() {
    let dir = std::env::temp_dir().join(format!("smallcover-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("classes.json");
    let status = Command::new(bin())
        .args([
            "classes",
            "--config",
            configs().join("i1.json").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["report"]["class_count"], 2);
    let csv = std::fs::read_to_string(dir.join("classes.csv")).unwrap();
    assert!(csv.starts_with("heavy_count,witness_count,size,bound,witness_sets"));
    assert_eq!(csv.lines().count(), 3);
    std::fs::remove_dir_all(&dir).ok();
}
