use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn wnl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wnl")).args(args).output().unwrap()
}

fn wnl_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wnl"))
        .args(args)
        .env(key, value)
        .output()
        .unwrap()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn state(name: &str) -> String {
    configs().join("states").join(name).to_string_lossy().into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn csv_rows(path: &str) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn vacuum_grid_is_positive() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("v.csv").to_string_lossy().into_owned();
    let o = wnl(&["grid", "--input", &state("vacuum.json"), "--grid", "101,101", "--box", "-4,4,-4,4", "--out", &out]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("x,p,w\n"));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 10201);
    assert!(rows.iter().all(|r| r[2].parse::<f64>().unwrap() > 0.0));
}

#[test]
fn cat_grid_has_negative_values_and_certificate() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("c.csv").to_string_lossy().into_owned();
    let o = wnl(&["grid", "--input", &state("cat_even_re2.json"), "--grid", "81,81", "--out", &out, "--certify"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(csv_rows(&out).iter().any(|r| r[2].parse::<f64>().unwrap() < 0.0));
    let cert: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(cert["negative"], true);
    assert!(cert["min"].as_f64().unwrap() < 0.0);
    for key in ["x", "p", "evals"] {
        assert!(cert.get(key).is_some());
    }
}

#[test]
fn malformed_input_exits_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", "{\"betas\": [[1, 0]]");
    let o = wnl(&["grid", "--input", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());

    let not_hermitian = write(
        &dir,
        "h.json",
        r#"{"betas": [[1, 0], [-1, 0]], "coeffs": [[[0.5, 0], [0.2, 0.1]], [[0.2, 0.1], [0.5, 0]]]}"#,
    );
    assert_eq!(wnl(&["grid", "--input", &not_hermitian]).status.code(), Some(2));
    assert_eq!(wnl(&["grid"]).status.code(), Some(2));
    assert_eq!(wnl(&["grid", "--input", &state("vacuum.json"), "--grid", "3"]).status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_3() {
    let o = wnl(&["grid", "--input", &state("vacuum.json"), "--out", "/nonexistent/dir/out.csv"]);
    assert_eq!(o.status.code(), Some(3));
    let o = wnl(&["grid", "--input", "/nonexistent/state.json"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn cat_sweep_row_and_flag_override() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", r#"{"command": "cat-sweep", "re_beta": [1.0], "tol": 0.5}"#);
    let out = dir.path().join("s.csv").to_string_lossy().into_owned();
    let o = wnl(&["cat-sweep", "--config", &cfg, "--tol", "1e-3", "--out", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("re_beta,delta_c_numeric,delta_c_analytic,abs_err,status\n"));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 1);
    let analytic: f64 = rows[0][2].parse().unwrap();
    assert!((analytic - 0.135_335).abs() < 1e-6);
    // the flag tolerance won over the config's 0.5
    assert!(rows[0][3].parse::<f64>().unwrap() <= 1e-3);
    assert_eq!(rows[0][4], "ok");
}

#[test]
fn invalid_ranges_exit_2() {
    let dir = TempDir::new().unwrap();
    let empty = write(&dir, "e.json", r#"{"re_beta": []}"#);
    assert_eq!(wnl(&["cat-sweep", "--config", &empty]).status.code(), Some(2));
    let odd = write(&dir, "o.json", r#"{"m": 63, "d": [2]}"#);
    assert_eq!(wnl(&["circle-sweep", "--config", &odd]).status.code(), Some(2));
    let unknown = write(&dir, "u.json", r#"{"re_beta": [1.0], "colour": 3}"#);
    assert_eq!(wnl(&["cat-sweep", "--config", &unknown]).status.code(), Some(2));
    let wrong = write(&dir, "w.json", r#"{"command": "verify"}"#);
    assert_eq!(wnl(&["cat-sweep", "--config", &wrong]).status.code(), Some(2));
    assert_eq!(wnl_env(&["verify"], "WNL_THREADS", "many").status.code(), Some(2));
}

#[test]
fn circle_sweep_small() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", r#"{"m": 16, "d": [3.0]}"#);
    let o = wnl(&["circle-sweep", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("d,delta_c_numeric,delta_c_bound,status"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 4);
    assert!(row[2].parse::<f64>().unwrap() > 0.0);
}

#[test]
fn radial_rows_flag_window() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "r.json", r#"{"m": 16, "d": 2.0, "samples": 20, "r_max": 4.0}"#);
    let out = dir.path().join("r.csv").to_string_lossy().into_owned();
    let o = wnl(&["circle-radial", "--config", &cfg, "--out", &out]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 20);
    assert!(rows[0][1..4].iter().all(|v| v.parse::<f64>().unwrap() > 0.0));
    assert!(rows.iter().any(|r| r[4] == "outside_window"));
}

#[test]
fn verify_is_deterministic_and_catches_fault() {
    let a = wnl(&["verify", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    let b = wnl_env(&["verify", "--seed", "7"], "WNL_THREADS", "1");
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).contains("all checks passed"));

    let f = wnl(&["verify", "--inject-fault"]);
    assert_eq!(f.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&f.stderr).contains("qndm"));
}

#[test]
fn golden_configs_parse() {
    for (cmd, file) in [
        ("cat-sweep", "fig1_cat_sweep.json"),
        ("circle-sweep", "fig2b_circle_sweep.json"),
        ("circle-radial", "fig2a_circle_radial.json"),
        ("verify", "verify.json"),
        ("grid", "grid_cat.json"),
    ] {
        let text = std::fs::read_to_string(configs().join(file)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["command"], cmd);
    }
    let o = wnl(&["circle-radial", "--config", &configs().join("fig2a_circle_radial.json").to_string_lossy()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 401);
}
