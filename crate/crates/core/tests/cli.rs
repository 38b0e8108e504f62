use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sumrate::cli::io::{read_field_csv, RunManifest};

fn sumrate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sumrate"))
        .args(args)
        .env("SUMRATE_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    sumrate(args).status.code().unwrap()
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_owned()
}

#[test]
fn iterate_writes_fields_trace_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    let args = ["iterate", "--function", "and-both", "--n", "21", "--t-max", "4", "--oracle", "--history", "--out", &out];
    assert_eq!(code(&args), 0);
    for name in ["rho_final.csv", "rate_final.csv", "trace.csv", "manifest.json", "rho_000.csv", "rho_004.csv"] {
        assert!(dir.path().join(name).exists(), "missing {name}");
    }
    let rho = read_field_csv(&dir.path().join("rho_final.csv")).unwrap();
    assert_eq!(rho.grid().size(), 21);
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 5);
    assert!(trace.lines().skip(1).all(|l| l.split(',').nth(3).is_some_and(|g| !g.is_empty())));
    let m = RunManifest::read(&dir.path().join("manifest.json")).unwrap();
    assert_eq!(m.subcommand, "iterate");
    assert_eq!(m.parameters["n"], 21);
}

#[test]
fn replay_reproduces_outputs() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    assert_eq!(code(&["iterate", "--n", "31", "--t-max", "6", "--out", &out_arg(first.path())]), 0);
    let manifest = first.path().join("manifest.json");
    assert_eq!(code(&["--threads", "1", "replay", manifest.to_str().unwrap(), "--out", &out_arg(second.path())]), 0);
    for name in ["rho_final.csv", "rate_final.csv"] {
        assert_eq!(fs::read(first.path().join(name)).unwrap(), fs::read(second.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn achievability_reports_rates() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    let run = sumrate(&["achievability", "--p", "0.3", "--q", "0.4", "--messages", "8", "--mc-samples", "2000", "--out", &out]);
    assert!(run.status.success());
    let rates = fs::read_to_string(dir.path().join("rates.csv")).unwrap();
    assert_eq!(rates.lines().count(), 1 + 8, "{rates}");
    assert!(String::from_utf8_lossy(&run.stdout).contains("integral 0.862559351553"));
    let mc: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("monte_carlo.json")).unwrap()).unwrap();
    assert_eq!(mc["decoding_errors"], 0);
}

#[test]
fn rd_modes_write_curves() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    assert_eq!(code(&["rd", "--mode", "single-terminal", "--p", "0.3", "--np", "41", "--nd", "11", "--out", &out]), 0);
    let curve = fs::read_to_string(dir.path().join("rd.csv")).unwrap();
    let last: Vec<&str> = curve.lines().last().unwrap().split(',').collect();
    assert_eq!(last[0].parse::<f64>().unwrap(), 1.0);
    assert!(last[1].parse::<f64>().unwrap().abs() < 1e-9);

    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    assert_eq!(code(&["rd", "--mode", "hamming-zero", "--n", "11", "--nd", "3", "--t-max", "3", "--out", &out]), 0);
    assert!(dir.path().join("rho_final_d0.csv").exists());
    assert!(fs::read_to_string(dir.path().join("rho_final.csv")).unwrap().starts_with("p,q,D,value\n"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    // usage and configuration problems
    assert_eq!(code(&["iterate", "--n", "1"]), 2);
    assert_eq!(code(&["iterate", "--bogus"]), 2);
    assert_eq!(code(&["achievability", "--p", "0.3", "--q", "0.4", "--messages", "3"]), 2);
    assert_eq!(code(&["rd", "--mode", "wyner-ziv", "--model", "/nonexistent.csv", "--out", &out]), 2);
    // gamma1 outside its domain is a runtime error
    assert_eq!(code(&["achievability", "--p", "0.6", "--q", "0.4", "--curve", "gamma1"]), 1);
}

#[test]
fn thread_count_does_not_change_results() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(code(&["--threads", "1", "iterate", "--n", "25", "--t-max", "5", "--out", &out_arg(a.path())]), 0);
    assert_eq!(code(&["--threads", "3", "iterate", "--n", "25", "--t-max", "5", "--out", &out_arg(b.path())]), 0);
    assert_eq!(fs::read(a.path().join("rho_final.csv")).unwrap(), fs::read(b.path().join("rho_final.csv")).unwrap());
    let ma = RunManifest::read(&a.path().join("manifest.json")).unwrap();
    let mb = RunManifest::read(&b.path().join("manifest.json")).unwrap();
    assert_eq!(ma.parameters, mb.parameters);
    assert!(!ma.args.iter().any(|s| s.contains("threads")));
}
