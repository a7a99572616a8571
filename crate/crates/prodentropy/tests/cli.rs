//! End-to-end tests of the `prodentropy` binary: run/verify round trips,
//! error exit codes, tamper detection, and bit-for-bit reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_prodentropy"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn binary");
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const STICKY_CONFIG: &str = r#"{
    "experiment": "markov_formula",
    "x_model": {"type": "markov", "transition": [[0.9, 0.1], [0.1, 0.9]]},
    "y_model": {"type": "periodic", "word": "01"}
}"#;

#[test]
fn run_then_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), STICKY_CONFIG);
    let out_dir = dir.path().join("out");
    let out = run_ok(&["run", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("PASS"), "run output: {stdout}");
    assert!(out_dir.join("results.json").exists());
    assert!(out_dir.join("results.csv").exists());

    let out = run_ok(&["verify", "--out", out_dir.to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("hold"), "verify output: {stdout}");
}

#[test]
fn invalid_arrival_density_exits_with_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{
            "experiment": "theorem_a",
            "x_model": {"type": "bernoulli", "theta": 0.5},
            "y_model": {"type": "periodic", "word": "000"}
        }"#,
    );
    let out = bin()
        .args(["run", "--config", &cfg, "--out", dir.path().join("out").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("error:"), "stderr: {stderr}");
}

#[test]
fn unknown_config_key_exits_with_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"experiment": "c4", "x_model": {"type": "bernoulli", "theta": 0.5}, "bogus": 1}"#,
    );
    let out = bin()
        .args(["run", "--config", &cfg, "--out", dir.path().join("out").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_detects_hand_edited_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), STICKY_CONFIG);
    let out_dir = dir.path().join("out");
    run_ok(&["run", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);

    // push the recorded product rate above its recorded upper bound
    let json_path = out_dir.join("results.json");
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    let rows = doc["rows"].as_array_mut().unwrap();
    let row = rows
        .iter_mut()
        .find(|r| r["quantity"] == "H(M|Y)")
        .expect("product-rate row present");
    row["value"] = serde_json::json!(0.45);
    row["lower"] = serde_json::json!(0.45);
    row["upper"] = serde_json::json!(0.45);
    std::fs::write(&json_path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();

    let out = bin().args(["verify", "--out", out_dir.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("violation"), "stderr: {stderr}");
}

#[test]
fn same_seed_reproduces_output_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    // a Monte Carlo experiment, so reproducibility is not vacuous
    let cfg = write_config(
        dir.path(),
        r#"{
            "experiment": "theorem_a",
            "x_model": {"type": "markov", "transition": [[0.9, 0.1], [0.1, 0.9]]},
            "y_model": {"type": "bernoulli", "theta": 0.5},
            "m_returns": 3,
            "n_samples": 5000
        }"#,
    );
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    run_ok(&["run", "--config", &cfg, "--out", out_a.to_str().unwrap(), "--seed", "42"]);
    run_ok(&["run", "--config", &cfg, "--out", out_b.to_str().unwrap(), "--seed", "42",
             "--threads", "2"]);
    let csv_a = std::fs::read_to_string(out_a.join("results.csv")).unwrap();
    let csv_b = std::fs::read_to_string(out_b.join("results.csv")).unwrap();
    // wall times differ; compare everything else column by column
    let strip = |text: &str| -> Vec<String> {
        text.lines()
            .map(|l| l.rsplit_once(',').map(|(head, _)| head.to_string()).unwrap())
            .collect()
    };
    assert_eq!(strip(&csv_a), strip(&csv_b));

    let out_c = dir.path().join("c");
    run_ok(&["run", "--config", &cfg, "--out", out_c.to_str().unwrap(), "--seed", "43"]);
    let csv_c = std::fs::read_to_string(out_c.join("results.csv")).unwrap();
    assert_ne!(strip(&csv_a), strip(&csv_c), "different seeds must change the Monte Carlo rows");
}

#[test]
fn demo_subcommand_runs() {
    let out = run_ok(&["demo", "bfree"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("theta = 0.5"), "stdout: {stdout}");
}
