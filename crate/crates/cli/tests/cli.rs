use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_isac-fbl"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn header_value(text: &str, key: &str) -> f64 {
    let prefix = format!("# {key} = ");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no {key} in header"))
        .parse()
        .unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn binary_example_reports_closed_forms() {
    let out = run(&["binary-example", "--n", "700", "--d-grid", "0.05:0.24:4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!((header_value(&text, "capacity") - 0.245_986).abs() < 1e-6);
    assert!((header_value(&text, "d_comm") - 0.243_239).abs() < 1e-6);
    let (header, rows) = csv_rows(&text);
    assert_eq!(rows.len(), 4);
    let (a, c) = (col(&header, "rate_ach"), col(&header, "rate_conv"));
    for row in &rows {
        let ach: f64 = row[a].parse().unwrap();
        let conv: f64 = row[c].parse().unwrap();
        assert!(ach <= conv + 1e-12, "{row:?}");
    }
}

#[test]
fn empty_grid_is_a_config_error() {
    let out = run(&["sweep", "--binary-q", "0.4", "--d-grid", "0:0.2:0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));
}

#[test]
fn channel_source_must_be_given() {
    let out = run(&["sweep"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn baseline_endpoints() {
    let out = run(&[
        "baselines", "--binary-q", "0.4", "--gamma-grid", "0:1:2", "--d-grid", "0.2:0.2:1",
        "--format", "json",
    ]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let summary = &v["summary"];
    let r_max = summary["r_max"].as_f64().unwrap();
    let d_comm = summary["d_comm"].as_f64().unwrap();
    let rows = v["rows"].as_array().unwrap();
    let find = |variant: &str, gamma: f64| {
        rows.iter()
            .find(|r| r["variant"] == variant && r["gamma"].as_f64() == Some(gamma))
            .unwrap()
    };
    assert_eq!(find("basic", 0.0)["rate"].as_f64(), Some(r_max));
    assert_eq!(find("basic", 0.0)["distortion"].as_f64(), Some(0.4));
    assert_eq!(find("improved", 0.0)["distortion"].as_f64(), Some(d_comm));
    assert_eq!(find("basic", 1.0)["rate"].as_f64(), Some(0.0));
    assert_eq!(find("basic", 1.0)["distortion"].as_f64(), Some(0.0));
    assert!(rows.iter().any(|r| r["variant"] == "joint"));
}

#[test]
fn simulate_replays_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    let out = run(&[
        "simulate", "--binary-q", "0.4", "--n", "64", "--msg-count", "32", "--alpha", "0.6",
        "--trials", "300", "--seed", "9", "--format", "json", "--out", first.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&[
        "--threads", "3", "simulate", "--config", first.to_str().unwrap(), "--format", "json",
        "--out", second.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
}

fn write_noiseless(path: &Path) {
    // Y = X and Z = S.
    let mut kernel = vec![vec![vec![vec![0.0; 2]; 2]; 2]; 2];
    for (x, per_x) in kernel.iter_mut().enumerate() {
        for (s, per_s) in per_x.iter_mut().enumerate() {
            per_s[x][s] = 1.0;
        }
    }
    let file = serde_json::json!({
        "x_size": 2, "s_size": 2, "y_size": 2, "z_size": 2,
        "state_prior": [0.5, 0.5],
        "kernel": kernel,
        "distortion": [[0.0, 1.0], [1.0, 0.0]],
    });
    std::fs::write(path, file.to_string()).unwrap();
}

#[test]
fn noiseless_channel_never_errs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("noiseless.json");
    write_noiseless(&path);
    // 64 codewords of length 40 collide with negligible probability.
    let out = run(&[
        "simulate", "--channel", path.to_str().unwrap(), "--n", "40", "--msg-count", "64",
        "--input", "0.5,0.5", "--trials", "500", "--format", "json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let row = &v["rows"][0];
    assert_eq!(row["errors"], 0);
    assert_eq!(row["eps_hat"].as_f64(), Some(0.0));
    assert_eq!(row["distortion_hat"].as_f64(), Some(0.0));
}

#[test]
fn symbol_cap_is_enforced_before_running() {
    let out = run(&[
        "simulate", "--binary-q", "0.4", "--n", "100", "--msg-count", "100000", "--alpha", "0.5",
        "--symbol-cap", "1000000",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
}

#[test]
fn infeasible_requests_exit_3() {
    let out = run(&["simulate", "--binary-q", "0.4", "--n", "50", "--rate", "-0.5", "--alpha", "0.5"]);
    assert_eq!(out.status.code(), Some(3));

    // Every bound is vacuous at this blocklength, but the table is still written.
    let out = run(&[
        "bounds", "--binary-q", "0.4", "--alpha", "0.5", "--n", "2", "--eps", "0.999", "--k", "0.01",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("rate_ach"));
}

#[test]
fn sweep_output_is_deterministic() {
    let args = ["sweep", "--binary-q", "0.3", "--n", "500", "--d-grid", "0.05:0.25:3"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}
