//! End-to-end tests of the `cvp2p` binary: exit codes, output formats, angle
//! parsing, and determinism of sweep files across worker counts.

use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvp2p"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn validate_exit_codes() {
    let ok = run(&["validate", "--rho", "1", "--theta", "pi/3"]);
    assert!(ok.status.success());
    assert!(stdout(&ok).contains("rho*cos(theta) = 0.5"));

    let bad = run(&["validate", "--rho", "0.5", "--theta", "pi/3"]);
    assert_eq!(bad.status.code(), Some(1));

    let unparsable = run(&["validate", "--theta", "sideways"]);
    assert_eq!(unparsable.status.code(), Some(1));

    let help = run(&["--help"]);
    assert!(help.status.success());
}

#[test]
fn eval_csv_and_json() {
    let csv = run(&[
        "eval", "--theta", "2pi/5", "--order", "inf", "--format", "csv",
    ]);
    assert!(csv.status.success());
    let text = stdout(&csv);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "parameter,L0,H0,pe_analytic,pe_empirical,pe_stderr,rbar_analytic,rbar_empirical,nbar_empirical,errors,rbar_plugin"
    );
    let row = lines.next().unwrap();
    assert!(row.contains("1.8380025058088338"), "row: {row}");

    let json = run(&[
        "eval", "--theta", "2pi/5", "--order", "12", "--rate", "4", "--format", "json",
    ]);
    assert!(json.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&json)).unwrap();
    assert_eq!(doc["metadata"]["config"]["order"], "12");
    let pe = doc["rows"][0]["pe_analytic"].as_f64().unwrap();
    assert!((pe - 0.004136720349336395).abs() < 1e-12);

    // Explicit bins: pe_analytic is the exact finite-bin error probability.
    let bins = run(&[
        "eval", "--theta", "2pi/5", "--order", "12", "--bins", "3,7", "--format", "json",
    ]);
    assert!(bins.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&bins)).unwrap();
    let pe = doc["rows"][0]["pe_analytic"].as_f64().unwrap();
    assert!(pe > 0.0 && pe < 0.05, "exact pe {pe}");
    assert!(doc["rows"][0]["rbar_analytic"].as_f64().unwrap() > 2.0);

    // --rate and --bins conflict.
    let both = run(&[
        "eval", "--theta", "2pi/5", "--order", "12", "--rate", "4", "--bins", "3,7",
    ]);
    assert_eq!(both.status.code(), Some(1));
}

#[test]
fn simulate_square_lattice_is_errorless() {
    let out = run(&[
        "simulate",
        "--rho",
        "1",
        "--theta",
        "pi/2",
        "--order",
        "inf",
        "--samples",
        "5000",
        "--seed",
        "9",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let row = &doc["rows"][0];
    assert_eq!(row["errors"], 0);
    assert_eq!(row["rbar_empirical"].as_f64().unwrap(), 0.0);
    assert_eq!(row["nbar_empirical"].as_f64().unwrap(), 1.0);
}

#[test]
fn simulate_stage1_source() {
    let out = run(&[
        "simulate",
        "--theta",
        "2pi/5",
        "--alpha",
        "0.0625",
        "--stage1-source",
        "gaussian",
        "--samples",
        "100000",
        "--seed",
        "1",
        "--format",
        "json",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let est = doc["estimate"]["mean"].as_f64().unwrap();
    assert!((est - 4.094).abs() < 0.25, "stage-I estimate {est}");
}

#[test]
fn sweep_files_identical_across_workers() {
    let dir = std::env::temp_dir();
    let p1: PathBuf = dir.join("cvp2p_cli_w1.json");
    let p8: PathBuf = dir.join("cvp2p_cli_w8.json");
    let common = [
        "sweep",
        "--param",
        "theta",
        "--min",
        "pi/3",
        "--max",
        "0.47pi",
        "--steps",
        "4",
        "--order",
        "inf",
        "--samples",
        "3000",
        "--seed",
        "11",
        "--format",
        "json",
    ];
    let mut args1: Vec<&str> = common.to_vec();
    args1.extend(["--workers", "1", "--out", p1.to_str().unwrap()]);
    let mut args8: Vec<&str> = common.to_vec();
    args8.extend(["--workers", "8", "--out", p8.to_str().unwrap()]);
    assert!(run(&args1).status.success());
    assert!(run(&args8).status.success());
    let b1 = std::fs::read(&p1).unwrap();
    let b8 = std::fs::read(&p8).unwrap();
    assert!(!b1.is_empty());
    assert_eq!(b1, b8);
}

#[test]
fn sweep_rate_grid_csv() {
    let out = run(&[
        "sweep", "--param", "rate", "--min", "4", "--max", "6", "--steps", "3", "--theta", "2pi/5",
        "--order", "12", "--format", "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 4);
    // P_e decreases with rate.
    let pes: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse::<f64>().unwrap())
        .collect();
    assert!(pes[0] > pes[1] && pes[1] > pes[2]);
}

#[test]
fn sweep_warns_and_keeps_invalid_rows() {
    let out = run(&[
        "sweep", "--param", "d1", "--min", "0.05", "--max", "0.4", "--steps", "5", "--theta",
        "2pi/5", "--order", "inf", "--format", "csv",
    ]);
    // d1 above rho*cos(theta) = 0.309 is invalid: warning rows, exit 0.
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 6);
    assert!(text.contains("NaN"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipped"));
}
