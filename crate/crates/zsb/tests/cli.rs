use serde_json::Value;
use std::f64::consts::PI;
use std::process::Command;

fn zsb(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_zsb")).args(args).env("ZSB_THREADS", "1").output().unwrap()
}

fn data(name: &str) -> String {
    format!("{}/data/potentials/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn spectrum_of_zero_potential() {
    let dir = tempfile::tempdir().unwrap();
    let out = zsb(&["spectrum", "--N", "4", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("spectrum.json")).unwrap()).unwrap();
    for (i, z) in v["lam_plus"].as_array().unwrap().iter().enumerate() {
        let n = i as f64 - 4.0;
        assert!((z[0].as_f64().unwrap() - n * PI).abs() < 1e-10);
    }
    assert!(dir.path().join("gaps.csv").exists());
}

#[test]
fn freqs_of_zero_potential() {
    let dir = tempfile::tempdir().unwrap();
    let out = zsb(&["freqs", "--N", "4", "--ns", "-2,1,3", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("freqs.json")).unwrap()).unwrap();
    for row in v.as_array().unwrap() {
        let n = row["n"].as_i64().unwrap() as f64;
        assert!((row["omega_sharp"].as_f64().unwrap() - (2.0 * n * PI).powi(3)).abs() < 1e-9);
        assert!(row["I"].as_f64().unwrap().abs() < 1e-14);
    }
}

#[test]
fn output_is_deterministic() {
    let p = data("er_two_mode.json");
    let a = zsb(&["--potential", &p, "freqs", "--N", "8", "--ns", "1,2"]);
    let b = zsb(&["--potential", &p, "freqs", "--N", "8", "--ns", "1,2"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "N = 8\ntol = nope\n").unwrap();
    let out = zsb(&["--config", cfg.to_str().unwrap(), "spectrum"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn abelian_and_zs_eval() {
    let out = zsb(&["zs", "eval", "--lambda", "1.5,-2:0.5"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let d = &v[0]["delta"];
    assert!((d[0].as_f64().unwrap() - 2.0 * 1.5f64.cos()).abs() < 1e-12);
    let out = zsb(&["abelian", "eval", "--lambda", "2.0:0.5", "--n", "1"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    // F_1 = −i(λ − π) at the zero potential
    assert!((v[0]["F"][0].as_f64().unwrap() - 0.5).abs() < 1e-10);
    assert!((v[0]["F"][1].as_f64().unwrap() + (2.0 - PI)).abs() < 1e-10);
}

#[test]
fn evolve_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out = zsb(&["--potential", &data("er_two_mode.json"), "evolve", "--grid", "128", "--t-end", "0.001", "--dt", "1e-4", "--sample-every", "5", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3);
    let out = zsb(&["--potential", &data("real_type_mixed.json"), "evolve"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_subset() {
    let out = zsb(&["validate", "--only", "1,12"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("criterion  1") && err.contains("criterion 12"));
}
