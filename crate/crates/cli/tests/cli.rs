use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn liberlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liberlab"))
        .args(args)
        .env("LIBERLAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

#[test]
fn lsi_on_free_law_has_zero_margin() {
    let out = liberlab(&["lsi", "--law", data("free_half.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let margin = r["result"]["lsi"]["margin"].as_f64().unwrap();
    assert!(margin.abs() < 1e-8, "{margin}");
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["grid"], 2048);
    assert_eq!(r["config"]["command"], "lsi");
}

#[test]
fn chi_of_non_generic_atoms_is_minus_infinity() {
    let out = liberlab(&["chi", "--law", data("bad_atoms.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["entropy"]["chi"], "-inf");
}

#[test]
fn verify_ricci_writes_an_all_pass_table() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("ricci.json");
    let out = liberlab(&[
        "verify-ricci",
        "--N",
        "5",
        "--k",
        "2",
        "--trials",
        "50",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("PASS") && !table.contains("FAIL"), "{table}");
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(r["result"]["all_pass"], true);
    let csv = std::fs::read_to_string(dir.path().join("ricci.csv")).unwrap();
    assert_eq!(csv.lines().count(), 51);
}

#[test]
fn validation_errors_exit_with_one() {
    assert_eq!(liberlab(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(liberlab(&["chi"]).status.code(), Some(1));
    assert_eq!(liberlab(&["chi", "--law", "/definitely/missing.json"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"alpha": 0.5, "beta": 0.5, "atoms": {"a11": 0.6, "a10": 0, "a01": 0, "a00": 0.6}, "density": {"kind": "zero"}}"#).unwrap();
    assert_eq!(liberlab(&["chi", "--law", bad.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(liberlab(&["verify-ricci", "--N", "4", "--k", "4"]).status.code(), Some(1));
}

#[test]
fn seeded_runs_are_reproducible() {
    let args = ["sample", "--N", "4", "--k", "2", "--l", "2", "--trials", "20", "--seed", "7"];
    let a = liberlab(&args);
    let b = liberlab(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = liberlab(&["sample", "--N", "4", "--k", "2", "--l", "2", "--trials", "20", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn liberate_writes_flow_csv_next_to_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("flow.csv");
    let out = liberlab(&[
        "liberate",
        "--law",
        data("uniform.json").to_str().unwrap(),
        "--particles",
        "32",
        "--tmax",
        "2",
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv.lines().next(), Some("t,chi,phi_star,half_integral"));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("flow.json")).unwrap()).unwrap();
    assert_eq!(r["result"]["diagnostics"]["chi_monotone"], true);
    assert_eq!(r["result"]["final_positions"].as_array().unwrap().len(), 32);
}

#[test]
fn relative_lsi_with_tilt_reports_both_sides() {
    let out = liberlab(&[
        "lsi",
        "--law",
        data("uniform.json").to_str().unwrap(),
        "--h",
        data("tilt_quadratic.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rel = &report(&out)["result"]["lsi"]["relative"];
    let margin = rel["margin"].as_f64().unwrap();
    assert!(margin >= 0.0);
    // an over-large tilt breaks the smallness hypothesis
    let out = liberlab(&[
        "lsi",
        "--law",
        data("uniform.json").to_str().unwrap(),
        "--h",
        data("tilt_quadratic.json").to_str().unwrap(),
        "--c1",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(1));
}
