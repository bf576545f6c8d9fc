use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gapmm::spectral::split;
use gapmm::symmat::{parse_matrix, spectral_norm};
use gapmm::Tolerances;
use serde_json::Value;

fn gapmm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gapmm"))
        .args(args)
        .env_remove("GAPMM_TOL_SCALE")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn gen(dir: &Path, kind: &str, dim: usize, seed: u64) {
    let out = gapmm(&["gen", "--kind", kind, "--dim", &dim.to_string(), "--seed", &seed.to_string(), "--out", s(dir)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn gen_records_positive_norm_margin() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), "bounded-pert", 20, 1);
    let m = json(&tmp.path().join("manifest.json"));
    assert_eq!(m["kind"], "bounded-pert");
    assert_eq!(m["dim"], 20);
    assert!(m["margins"]["norm_condition"].as_f64().unwrap() > 0.0);
}

#[test]
fn gen_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    gen(&a, "offdiag-form", 25, 9);
    gen(&b, "offdiag-form", 25, 9);
    for f in ["A.txt", "V.txt", "manifest.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn offdiag_generator_has_zero_diagonal_blocks() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), "offdiag-op", 30, 4);
    let a = parse_matrix(&fs::read_to_string(tmp.path().join("A.txt")).unwrap()).unwrap();
    let v = parse_matrix(&fs::read_to_string(tmp.path().join("V.txt")).unwrap()).unwrap();
    let gamma = json(&tmp.path().join("manifest.json"))["gamma"].as_f64().unwrap();
    let sa = split(&a, gamma, &Tolerances::default()).unwrap();
    let vm = v.as_mat();
    // the text format rounds to 17 significant digits, so this is the exact construction
    assert!(spectral_norm(&(&sa.pp * vm * &sa.pp)) <= 1e-14);
    assert!(spectral_norm(&(&sa.pm * vm * &sa.pm)) <= 1e-14);
}

#[test]
fn verify_batch_passes_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (r1, r2) = (tmp.path().join("r1.json"), tmp.path().join("r2.json"));
    for r in [&r1, &r2] {
        let out = gapmm(&["verify", "--thm", "thm1.4", "--batch", "200", "--trials", "10", "--seed", "5", "--json", s(r)]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(fs::read(&r1).unwrap(), fs::read(&r2).unwrap());
    let rep = json(&r1);
    assert_eq!(rep["instances"].as_array().unwrap().len(), 200);
    assert_eq!(rep["summary"]["fail"], 0);
    assert_eq!(rep["run"]["seed"], 5);
    let first = &rep["instances"][0];
    for key in ["id", "kind", "hypotheses", "conclusions", "minimax"] {
        assert!(first.get(key).is_some(), "{key}");
    }
    assert!(first["minimax"][0].get("probe_min").is_some());
}

#[test]
fn verify_reads_instance_directories() {
    let tmp = tempfile::tempdir().unwrap();
    let out = gapmm(&["gen", "--kind", "bounded-pert", "--dim", "12", "--count", "3", "--out", s(tmp.path())]);
    assert_eq!(code(&out), 0);
    for thm in ["thm1.2", "prop2.1", "cor2.4"] {
        let report = tmp.path().join(format!("{thm}.json"));
        let out = gapmm(&["verify", "--thm", thm, "--in", s(tmp.path()), "--trials", "20", "--json", s(&report)]);
        assert_eq!(code(&out), 0, "{thm}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(json(&report)["instances"].as_array().unwrap().len(), 3);
    }
}

#[test]
fn violated_hypothesis_gates_conclusions() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), "offdiag-op", 20, 2);
    // a diagonal V is not off-diagonal with respect to any split of A
    let n = 20;
    let mut text = format!("{n}\n");
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| if i == j { "0.3".into() } else { "0".into() }).collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    fs::write(tmp.path().join("V.txt"), text).unwrap();
    let report = tmp.path().join("r.json");
    let out = gapmm(&["verify", "--thm", "thm1.4", "--in", s(tmp.path()), "--trials", "10", "--json", s(&report)]);
    assert_eq!(code(&out), 0);
    let rep = json(&report);
    let inst = &rep["instances"][0];
    let offdiag = inst["hypotheses"].as_array().unwrap().iter().find(|h| h["name"] == "offdiag_plus").unwrap();
    assert_eq!(offdiag["holds"], false);
    assert!(inst["conclusions"].as_array().unwrap().iter().all(|c| c["holds"].is_null()));
    assert_eq!(rep["summary"]["pass"], 0);
}

#[test]
fn tiny_tolerance_fails() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), "offdiag-op", 60, 8);
    let out = gapmm(&["verify", "--thm", "thm1.4", "--in", s(tmp.path()), "--trials", "10", "--tol", "1e-15"]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn parse_errors_report_position() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), "offdiag-op", 8, 1);
    fs::write(tmp.path().join("A.txt"), "2\n1 0\n0 x\n").unwrap();
    let out = gapmm(&["verify", "--thm", "thm1.4", "--in", s(tmp.path())]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3, column 3"), "{err}");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&gapmm(&["verify", "--thm", "thm9"])), 2);
    assert_eq!(code(&gapmm(&["gen", "--kind", "unknown", "--out", "x"])), 2);
    assert_eq!(code(&gapmm(&["verify", "--thm", "thm1.4", "--in", "/nonexistent/dir"])), 2);
}

#[test]
fn stokes_one_d_table() {
    let tmp = tempfile::tempdir().unwrap();
    let (csv, report) = (tmp.path().join("t.csv"), tmp.path().join("t.json"));
    let out = gapmm(&[
        "stokes", "--dim", "1", "--points", "16", "--nu", "1", "--vstar", "0.3", "--kmax", "6", "--levels", "2",
        "--csv", s(&csv), "--json", s(&report),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let rows: Vec<Vec<f64>> = text.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 12);
    for r in &rows {
        let (c_h, lower, value, upper) = (r[2], r[4], r[5], r[6]);
        assert!((c_h - 1.0).abs() < 1e-10);
        assert!(lower <= value + 1e-8 && value <= upper + 1e-8, "{r:?}");
        assert!((upper - lower - 0.09).abs() < 1e-12);
    }
    let rep = json(&report);
    assert_eq!(rep["levels"].as_array().unwrap().len(), 2);
    assert_eq!(rep["levels"][1]["points"], 33);
    assert!(rep["convergence"]["orders"][0].as_f64().unwrap() > 1.8);
}

#[test]
fn stokes_without_coupling_is_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("t.csv");
    let out = gapmm(&["stokes", "--dim", "1", "--points", "12", "--vstar", "0", "--csv", s(&csv), "--json", s(&tmp.path().join("r.json"))]);
    assert_eq!(code(&out), 0);
    for l in fs::read_to_string(&csv).unwrap().lines().skip(1) {
        let r: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((r[5] - r[4]).abs() <= 1e-10 * r[4], "{l}");
    }
}

#[test]
fn stokes_budget() {
    let out = gapmm(&["stokes", "--dim", "2", "--points", "30"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
    let out = gapmm(&["stokes", "--dim", "1", "--points", "40", "--budget", "50"]);
    assert_eq!(code(&out), 2);
}

fn write_two_by_two(dir: &Path) {
    fs::create_dir_all(dir).unwrap();
    fs::write(dir.join("A.txt"), "2\n1 0\n0 -1\n").unwrap();
    fs::write(dir.join("V.txt"), "2\n0 1\n1 0\n").unwrap();
    let manifest = serde_json::json!({
        "id": "rot", "kind": "offdiag-op", "dim": 2, "gap": [-1.0, 1.0], "gamma": 0.0,
        "branch": "lower", "seed": 0, "margins": {}
    });
    fs::write(dir.join("manifest.json"), manifest.to_string()).unwrap();
}

#[test]
fn sweep_two_by_two_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    write_two_by_two(tmp.path());
    let (csv, report) = (tmp.path().join("c.csv"), tmp.path().join("r.json"));
    let out = gapmm(&["sweep", "--in", s(tmp.path()), "--t", "-2:2:9", "--trials", "20", "--csv", s(&csv), "--json", s(&report)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let lines: Vec<String> = fs::read_to_string(&csv).unwrap().lines().skip(1).map(String::from).collect();
    assert_eq!(lines.len(), 9);
    for l in &lines {
        let r: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(r[1], 1.0);
        assert!((r[2] - (1.0 + r[0] * r[0]).sqrt()).abs() < 1e-14, "{l}");
    }
    let rep = json(&report);
    let lip = rep["instances"][0]["conclusions"].as_array().unwrap().iter().find(|c| c["name"] == "lipschitz").unwrap();
    assert_eq!(lip["holds"], true);
}

#[test]
fn sweep_identity_point_and_skipped_range() {
    let tmp = tempfile::tempdir().unwrap();
    gen(tmp.path(), "bounded-pert", 30, 6);
    let csv = tmp.path().join("c.csv");
    let report = tmp.path().join("r.json");
    let out = gapmm(&["sweep", "--in", s(tmp.path()), "--t", "-0.5:1:7", "--trials", "20", "--csv", s(&csv), "--json", s(&report)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    // t = -0.5 and t = -0.25 lie outside [0, 1]
    assert!(!text.contains("-5e-1") && !text.contains("-2.5e-1"));
    let notes = json(&report)["instances"][0]["notes"].to_string();
    assert!(notes.contains("skipped t = -0.5"));
    // the curve at t = 0 is the unperturbed spectrum above the split point
    let a = parse_matrix(&fs::read_to_string(tmp.path().join("A.txt")).unwrap()).unwrap();
    let m = json(&tmp.path().join("manifest.json"));
    let (c, d) = (m["gap"][0].as_f64().unwrap(), m["gap"][1].as_f64().unwrap());
    let above: Vec<f64> = a.eigenvalues().unwrap().into_iter().filter(|&l| l > 0.5 * (c + d)).collect();
    let at_zero: Vec<f64> = text
        .lines()
        .filter(|l| l.starts_with("0e0,"))
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(!at_zero.is_empty());
    for (x, y) in at_zero.iter().zip(&above) {
        assert!((x - y).abs() < 1e-12);
    }
}
