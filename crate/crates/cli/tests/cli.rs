//! End-to-end checks of the binary: exit codes, determinism, and JSON
//! outputs validating against the shipped schema.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minmod"))
        .args(args)
        .current_dir(repo_root())
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn schema_validator() -> jsonschema::Validator {
    let text = std::fs::read_to_string(repo_root().join("schema/report.schema.json")).unwrap();
    let schema: serde_json::Value = serde_json::from_str(&text).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

#[test]
fn fixtures_parse_and_validate() {
    for fixture in [
        "fixtures/inoue_k7.json",
        "fixtures/chen_k7.json",
        "fixtures/kulikov_k6.json",
        "fixtures/burniat_k6.json",
        "fixtures/pq_k6_d4z2.json",
        "fixtures/pq_k4_z4z2.json",
    ] {
        let text = stdout(&["surf", "validate", "--input", fixture]);
        assert!(text.contains("valid"), "{fixture}: {text}");
    }
}

#[test]
fn missing_file_and_validation_failure_exit_one() {
    let out = run(&["surf", "fibrations", "--input", "fixtures/nope.json"]);
    assert_eq!(out.status.code(), Some(1));

    // an asymmetric gram matrix is named as a symmetry violation
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"name": "bad", "k2": 7, "pg": 0, "q": 0,
            "curves": [{"name": "A", "genus": 1}, {"name": "B", "genus": 1}],
            "gram": [[-1, 2], [1, -1]]}"#,
    )
    .unwrap();
    let out = run(&["surf", "validate", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("symmetry"), "violation must be named: {text}");

    // malformed command line is an input error, not an internal one
    let out = run(&["surf", "validate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn contract_rejects_indefinite_sets() {
    let out = run(&[
        "surf",
        "contract",
        "--input",
        "fixtures/inoue_k7.json",
        "--set",
        "D1,D2",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stderr);
    assert!(text.contains("negative definite"), "{text}");
}

#[test]
fn negative_arguments_after_separator() {
    let text = stdout(&["qf", "hilbert", "--", "-3", "-3", "3"]);
    assert!(text.contains("= -1"), "{text}");
    let text = stdout(&["qf", "hilbert", "--", "-1", "-1", "inf"]);
    assert!(text.contains("= -1"), "{text}");
}

#[test]
fn reruns_are_byte_identical() {
    let commands: Vec<Vec<&str>> = vec![
        vec!["surf", "validate", "--input", "fixtures/inoue_k7.json", "--json"],
        vec!["surf", "fibrations", "--input", "fixtures/kulikov_k6.json", "--json"],
        vec!["surf", "models", "--input", "fixtures/pq_k4_z4z2.json", "--json"],
        vec![
            "surf", "contract", "--input", "fixtures/kulikov_k6.json", "--set", "E1,E2,E3",
            "--json",
        ],
        vec!["hj", "eval", "2,3,2", "--json"],
        vec!["hj", "expand", "8", "5", "--json"],
        vec!["hj", "dx2", "2,3", "--json"],
        vec!["hj", "star", "2", "3", "--json"],
        vec!["qf", "legendre", "2", "7", "--json"],
        vec!["qf", "invariants", "--diag", "-2,-6", "--place", "3", "--json"],
        vec![
            "enum", "baskets", "--rho0", "2", "--sing", "6", "--jobs", "4", "--json",
        ],
    ];
    for args in &commands {
        let first = stdout(args);
        let second = stdout(args);
        assert_eq!(first, second, "rerun of {args:?} differs");
    }
}

#[test]
fn json_outputs_validate_against_schema() {
    let validator = schema_validator();
    let commands: Vec<Vec<&str>> = vec![
        vec!["surf", "validate", "--input", "fixtures/chen_k7.json", "--json"],
        vec!["surf", "fibrations", "--input", "fixtures/chen_k7.json", "--json"],
        vec!["surf", "models", "--input", "fixtures/inoue_k7.json", "--json"],
        vec!["surf", "models", "--input", "fixtures/pq_k4_z4z2.json", "--json"],
        vec![
            "surf", "contract", "--input", "fixtures/pq_k6_d4z2.json", "--set", "E1,E2",
            "--json",
        ],
        vec!["enum", "baskets", "--rho0", "2", "--sing", "6", "--json"],
    ];
    for args in &commands {
        let text = stdout(args);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        let errors: Vec<String> =
            validator.iter_errors(&value).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}");
    }
}

#[test]
fn json_round_trips_losslessly() {
    let text = stdout(&["surf", "models", "--input", "fixtures/kulikov_k6.json", "--json"]);
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    let again = serde_json::to_string(&value).unwrap();
    let reparsed: serde_json::Value = serde_json::from_str(&again).unwrap();
    assert_eq!(value, reparsed);
    // no floats anywhere: every leaf number-like value is a string
    fn no_floats(v: &serde_json::Value) {
        match v {
            serde_json::Value::Number(n) => {
                assert!(n.is_i64() || n.is_u64(), "float leaked into report: {n}")
            }
            serde_json::Value::Array(items) => items.iter().for_each(no_floats),
            serde_json::Value::Object(map) => map.values().for_each(no_floats),
            _ => {}
        }
    }
    no_floats(&value);
}

#[test]
fn knockout_file_is_accepted() {
    let text = stdout(&[
        "enum",
        "baskets",
        "--rho0",
        "1",
        "--sing",
        "4",
        "--knockouts",
        "fixtures/knockouts_hko.json",
    ]);
    assert!(text.contains("survivors: 2"), "{text}");
}
