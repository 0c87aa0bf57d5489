use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fracdiff(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracdiff"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn summary(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("one JSON line")
}

#[test]
fn ml_prints_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracdiff(dir.path(), &["ml", "--alpha", "0.5", "--beta", "1", "--z", "-4"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "z,value\n-4,0.136999457625061\n");
    let out = fracdiff(dir.path(), &["ml", "--alpha", "1", "--z-grid", "-2:0:3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.contains("0,1\n"));
    assert!(text.contains("-1,0.367879441171442\n"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(fracdiff(dir.path(), &["ml", "--alpha", "3", "--z", "1"]).status.code(), Some(2));
    assert_eq!(fracdiff(dir.path(), &["solve", "--alpha", "1.5"]).status.code(), Some(2));
    assert_eq!(fracdiff(dir.path(), &["solve", "--method", "euler"]).status.code(), Some(2));
    assert_eq!(fracdiff(dir.path(), &["bogus"]).status.code(), Some(2));
    let out = fracdiff(dir.path(), &["counterexample", "--nx", "64"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("odd nx"));

    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"problem": {"alhpa": 0.5}}"#).unwrap();
    let out = fracdiff(dir.path(), &["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alhpa"));

    // g vanishing at x0 gives a kernel that is identically zero
    std::fs::write(&cfg, r#"{"g": {"kind": "sine", "mode": 2}, "x0": 0.5}"#).unwrap();
    let out = fracdiff(dir.path(), &["invert", "--config", cfg.to_str().unwrap(), "--steps", "50"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate kernel"));
}

#[test]
fn show_config_applies_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"problem": {"nx": 31, "steps": 20}, "method": "l1"}"#).unwrap();
    let out = fracdiff(
        dir.path(),
        &["solve", "--config", cfg.to_str().unwrap(), "--alpha", "0.25", "--show-config"],
    );
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["problem"]["nx"], 31);
    assert_eq!(v["problem"]["alpha"], 0.25);
    assert_eq!(v["method"], "l1");
    assert_eq!(v["output"], "solution.csv");
    assert!(!dir.path().join("solution.csv").exists());

    // the printed config round-trips
    std::fs::write(&cfg, &out.stdout).unwrap();
    let again = fracdiff(dir.path(), &["solve", "--config", cfg.to_str().unwrap(), "--show-config"]);
    assert_eq!(again.stdout, out.stdout);
}

#[test]
fn counterexample_trace_vanishes() {
    let dir = tempfile::tempdir().unwrap();
    let s = summary(&fracdiff(dir.path(), &["counterexample"]));
    assert!(s["max_abs_u_at_half"].as_f64().unwrap() < 1e-8);
    assert!(s["l1_max_abs_u_at_half"].as_f64().unwrap() < 1e-8);
    assert!(s["max_abs_u"].as_f64().unwrap() > 1e-2);
    assert_eq!(s["uniqueness"], false);
    let csv = std::fs::read_to_string(dir.path().join("counterexample.csv")).unwrap();
    assert!(csv.starts_with("t,u_half,u_half_alt,u_half_l1,u_quarter\n"));
}

#[test]
fn zero_data_inverts_to_zero() {
    let dir = tempfile::tempdir().unwrap();
    let s = summary(&fracdiff(dir.path(), &["invert", "--zero-data"]));
    assert!(s["rho_max_abs"].as_f64().unwrap() < 1e-8);
}

#[test]
fn noiseless_inversion() {
    let dir = tempfile::tempdir().unwrap();
    let s = summary(&fracdiff(dir.path(), &["invert"]));
    assert!(s["relative_l2_error"].as_f64().unwrap() < 0.05);
    let csv = std::fs::read_to_string(dir.path().join("inversion.csv")).unwrap();
    assert_eq!(csv.lines().count(), 402);
}

#[test]
fn weak_principle_on_parabola() {
    let dir = tempfile::tempdir().unwrap();
    let s = summary(&fracdiff(dir.path(), &["check", "--principle", "weak"]));
    assert_eq!(s["violated"], false);
    assert_eq!(s["hypothesis_met"], true);
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["principle"], "weak");
    assert_eq!(report["zero_count_per_x"].as_array().unwrap().len(), 255);

    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"initial": {"kind": "sine", "mode": 2}}"#).unwrap();
    let s = summary(&fracdiff(dir.path(), &["check", "--config", cfg.to_str().unwrap()]));
    assert_eq!(s["violated"], true);
    assert_eq!(s["hypothesis_met"], false);
}

#[test]
fn green_scan() {
    let dir = tempfile::tempdir().unwrap();
    let s = summary(&fracdiff(dir.path(), &["green"]));
    assert_eq!(s["ok"], true);
    let entries = s["entries"].as_array().unwrap();
    let eps = |n: u64| {
        entries
            .iter()
            .find(|e| e["t"] == 1e-5 && e["modes"] == n)
            .unwrap()["epsilon"]
            .as_f64()
            .unwrap()
    };
    assert!(eps(64) < 0.1 * eps(16));
}

fn run_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let cfg = dir.join("src.json");
    std::fs::write(
        &cfg,
        r#"{"problem": {"nx": 63, "steps": 200},
            "source": {"rho": {"kind": "polynomial", "coeffs": [1, 0, 1]}, "g": {"kind": "hat", "center": 0.3, "width": 0.2}}}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let runs: [&[&str]; 7] = [
        &["solve", "--config", cfg],
        &["solve", "--config", cfg, "--method", "l1", "-o", "l1.csv"],
        &["green"],
        &["check", "--principle", "zero_set"],
        &["invert", "--noise-level", "0.01", "--seed", "7"],
        &["counterexample"],
        &["ml", "--alpha", "0.7", "--beta", "1.3", "--z-grid", "-50:0:25"],
    ];
    let mut outputs = Vec::new();
    for args in runs {
        let out = fracdiff(dir, args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        outputs.push((format!("{args:?} stdout"), out.stdout));
    }
    for f in ["solution.csv", "l1.csv", "green.csv", "report.json", "inversion.csv", "counterexample.csv"] {
        outputs.push((f.to_string(), std::fs::read(dir.join(f)).unwrap()));
    }
    outputs
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = run_all(a.path());
    let second = run_all(b.path());
    for ((name, x), (_, y)) in first.iter().zip(&second) {
        let x = String::from_utf8_lossy(x).replace(a.path().to_str().unwrap(), "");
        let y = String::from_utf8_lossy(y).replace(b.path().to_str().unwrap(), "");
        assert!(x == y, "{name} differs between runs");
    }
}
