use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

fn lrdfield(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lrdfield")).arg("--out").arg(dir).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, json).unwrap();
    p.to_string_lossy().into_owned()
}

fn summary_value(dir: &Path, file: &str, key: &str) -> String {
    let text = fs::read_to_string(dir.join(file)).unwrap();
    text.lines().find_map(|l| l.strip_prefix(&format!("{key},"))).unwrap().to_string()
}

#[test]
fn coeffs_reports_ranks() {
    // the cubic uses b² = 2 ln 2, where C_1 vanishes
    let cases = [
        (r#"{"kind":"power","l":1,"threshold":0.0}"#, "1"),
        (r#"{"kind":"power","l":2,"threshold":1.0}"#, "2"),
        (r#"{"kind":"indicator_poly","poly":[0.0,1.3862943611198906,0.0,-1.0],"threshold":0.0}"#, "3"),
        (r#"{"kind":"paired_quartic","p":0.5}"#, "4"),
    ];
    for (integrand, rank) in cases {
        let dir = TempDir::new().unwrap();
        let cfg = write_config(dir.path(), "c.json", &format!(r#"{{"integrand":{integrand},"j_max":12}}"#));
        let o = lrdfield(dir.path(), &["--config", &cfg, "coeffs"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), format!("rank {rank}"));
        assert_eq!(summary_value(dir.path(), "coeffs_summary.csv", "rank"), rank);
        assert_eq!(fs::read_to_string(dir.path().join("coeffs.csv")).unwrap().lines().count(), 14);
    }
}

#[test]
fn rate_prints_example_bound() {
    let dir = TempDir::new().unwrap();
    let o = lrdfield(dir.path(), &["rate", "--d", "4", "--kappa", "2", "--alpha", "1.3333333333333333", "--tau", "-1"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["bound"].as_f64().unwrap() - 4.0 / 45.0).abs() < 1e-12);
    assert_eq!(v["case"], "case1");
    let b: f64 = summary_value(dir.path(), "rate.csv", "bound").parse().unwrap();
    assert!((b - 4.0 / 45.0).abs() < 1e-12);
    let bad = lrdfield(dir.path(), &["rate", "--d", "4", "--kappa", "2", "--alpha", "2.0", "--tau", "-1"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn limit_sample_and_distance() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "l.json",
        r#"{"surface":{"shape":"sphere","d":2,"resolution":64},"alpha":0.4,"kappa":1,"Lambda":4.0,"cells_per_axis":16,"n_draws":50,"seed":3}"#,
    );
    let o = lrdfield(dir.path(), &["--config", &cfg, "limit-sample"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(summary["max_imag_residual"].as_f64().unwrap() <= 1e-8);
    let draws = dir.path().join("limit_draws.csv");
    assert_eq!(fs::read_to_string(&draws).unwrap().lines().count(), 51);
    let p = draws.to_string_lossy().into_owned();
    let o = lrdfield(dir.path(), &["distance", &p, &p]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim().parse::<f64>().unwrap(), 0.0);
    assert!(dir.path().join("distance.csv").exists());
}

#[test]
fn verify_parseval_passes() {
    let dir = TempDir::new().unwrap();
    let o = lrdfield(dir.path(), &["verify", "parseval"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let text = fs::read_to_string(dir.path().join("verify_parseval.csv")).unwrap();
    assert!(text.starts_with("suite,check,value,tolerance,pass"));
    assert!(!text.contains(",false"));
}

const SIMULATE: &str = r#"{"field":{"d":2,"alpha":0.4,"L":"constant"},"surface":{"shape":"sphere","d":2,"resolution":32},
    "integrand":{"kind":"power","l":1,"threshold":0.0},"r_grid":[2.0,4.0],"n_rep":REPS,"seed":11}"#;

#[test]
fn simulate_reruns_are_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let cfg = write_config(a.path(), "s.json", &SIMULATE.replace("REPS", "20"));
    assert!(lrdfield(a.path(), &["--config", &cfg, "simulate"]).status.success());
    assert!(lrdfield(b.path(), &["--config", &cfg, "--threads", "2", "simulate"]).status.success());
    for f in ["ensemble_000_raw.csv", "ensemble_001_thm_normalized.csv", "simulate_summary.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let lines = fs::read_to_string(a.path().join("ensemble_001_raw.csv")).unwrap().lines().count();
    assert_eq!(lines, 21);
    // a different seed changes the values
    let c = TempDir::new().unwrap();
    assert!(lrdfield(c.path(), &["--config", &cfg, "--seed", "12", "simulate"]).status.success());
    assert_ne!(fs::read(a.path().join("ensemble_000_raw.csv")).unwrap(), fs::read(c.path().join("ensemble_000_raw.csv")).unwrap());
}

#[test]
fn zero_replications_write_headers_only() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "s.json", &SIMULATE.replace("REPS", "0"));
    let o = lrdfield(dir.path(), &["--config", &cfg, "simulate"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("ensemble_000_raw.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
}

#[test]
fn mixed_normalizations_are_rejected() {
    let dir = TempDir::new().unwrap();
    let a = write_config(dir.path(), "a.csv", "r,replication,value,normalization,kappa\n4,0,0.1,raw,1\n4,1,0.2,raw,1\n");
    let b = write_config(dir.path(), "b.csv", "r,replication,value,normalization,kappa\n4,0,0.1,thm_normalized,1\n");
    let mixed = write_config(dir.path(), "m.csv", "r,replication,value,normalization,kappa\n4,0,0.1,raw,1\n4,1,0.2,thm_normalized,1\n");
    assert_eq!(lrdfield(dir.path(), &["distance", &a, &b]).status.code(), Some(2));
    assert_eq!(lrdfield(dir.path(), &["distance", &a, &mixed]).status.code(), Some(2));
    assert_eq!(lrdfield(dir.path(), &["distance", &a, &a]).status.code(), Some(0));
}

#[test]
fn config_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"integrand":{"kind":"hermite","k":2},"j_max":8,"extra":1}"#);
    let o = lrdfield(dir.path(), &["--config", &cfg, "coeffs"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("extra"));
    assert_eq!(lrdfield(dir.path(), &["coeffs"]).status.code(), Some(2));
    assert_eq!(lrdfield(dir.path(), &["--threads", "0", "rate", "--d", "3", "--kappa", "1", "--alpha", "0.5", "--tau", "-1"]).status.code(), Some(2));
}
