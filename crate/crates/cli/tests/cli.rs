use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn ubp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ubp"))
        .args(args)
        .output()
        .expect("run ubp")
}

fn hot_stock_csv(dir: &Path, t: usize) -> String {
    let mut s = String::from("stock,cash\n");
    for _ in 0..t {
        s.push_str("2,1\n0.5,1\n");
    }
    let path = dir.join("hot.csv");
    std::fs::write(&path, s).unwrap();
    path.to_str().unwrap().to_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn backtest_hot_stock_final_wealth() {
    let dir = TempDir::new().unwrap();
    let input = hot_stock_csv(dir.path(), 10);
    let out = dir.path().join("rec.json");
    let o = ubp(&[
        "backtest",
        "--input",
        &input,
        "--samples",
        "100000",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rec = json(&out);
    let last = rec["periods"].as_array().unwrap().last().unwrap().clone();
    let log_w = last["universal_log_wealth"].as_f64().unwrap();
    let se = last["universal_log_wealth_se"].as_f64().unwrap();
    let closed = (2f64.powi(15) - 12.0 * 12.0 - 2f64.powi(-9)) / (11.0 * 12.0 * 13.0);
    assert!(
        (log_w - closed.ln()).abs() <= 3.0 * se + 1e-12,
        "{log_w} vs {}",
        closed.ln()
    );
    let summary = String::from_utf8(o.stdout).unwrap();
    assert_eq!(summary.lines().count(), 12);
    assert!(summary
        .lines()
        .nth(11)
        .unwrap()
        .trim_start()
        .starts_with("10 "));
}

#[test]
fn quadrature_backtest_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let input = hot_stock_csv(dir.path(), 10);
    let out = dir.path().join("rec.json");
    let o = ubp(&[
        "backtest",
        "--input",
        &input,
        "--method",
        "quadrature",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let last = json(&out)["periods"][10].clone();
    let w = last["universal_log_wealth"].as_f64().unwrap().exp();
    assert!((w / 19.011655011655 - 1.0).abs() < 1e-6, "{w}");
}

#[test]
fn order_one_backtest_tracks_universal_crp() {
    let dir = TempDir::new().unwrap();
    let input = hot_stock_csv(dir.path(), 3);
    let out = dir.path().join("rec.json");
    let o = ubp(&[
        "backtest",
        "--input",
        &input,
        "--order",
        "1",
        "--method",
        "quadrature",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    // Order 1 sees each half-period as its own period.
    let periods = json(&out)["periods"].as_array().unwrap().clone();
    assert_eq!(periods.len(), 7);
    for t in 0..=3 {
        let log_w = periods[2 * t]["universal_log_wealth"].as_f64().unwrap();
        let oracle = ubp_core::hotstock::hotstock_universal_1linear(t);
        assert!((log_w.exp() / oracle - 1.0).abs() < 1e-10, "t={t}");
    }
}

#[test]
fn empty_input_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("empty.csv");
    std::fs::write(&path, "").unwrap();
    let o = ubp(&["backtest", "--input", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let missing = ubp(&[
        "hindsight",
        "--input",
        dir.path().join("nope.csv").to_str().unwrap(),
    ]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn parse_error_reports_location() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "a,b\n1,1\n1,-2\n").unwrap();
    let o = ubp(&["hindsight", "--input", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("row 3"), "{err}");
}

#[test]
fn non_convergence_exit_code() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("r.csv");
    std::fs::write(
        &path,
        "a,b,c\n1.3,0.7,1\n0.6,1.5,1.1\n1.2,0.9,0.8\n0.9,1.1,1.4\n",
    )
    .unwrap();
    let o = ubp(&[
        "hindsight",
        "--input",
        path.to_str().unwrap(),
        "--max-iter",
        "1",
        "--tol",
        "1e-14",
    ]);
    assert_eq!(
        o.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn hindsight_hot_stock_is_perfect_trade() {
    let dir = TempDir::new().unwrap();
    let input = hot_stock_csv(dir.path(), 6);
    let o = ubp(&["hindsight", "--input", &input]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let w: Vec<f64> = v["strategy"]["weights"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert_eq!(w.len(), 4);
    assert!((w[1] - 1.0).abs() < 1e-6);
    assert!((v["log_wealth"].as_f64().unwrap() - 6.0 * 2f64.ln()).abs() < 1e-12);
}

#[test]
fn bounds_table_values() {
    let o = ubp(&[
        "bounds",
        "--assets",
        "2",
        "--order",
        "1,2",
        "--periods",
        "0..1",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    let bound = |h: u64, t: u64| {
        rows.iter().find(|r| r["H"] == h && r["T"] == t).unwrap()["bound"]
            .as_f64()
            .unwrap()
    };
    assert!((bound(2, 1) - 0.25).abs() < 1e-15);
    assert!((bound(1, 1) - 0.5).abs() < 1e-15);
    assert_eq!(bound(2, 0), 1.0);
    assert_eq!(bound(1, 0), 1.0);
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let input = hot_stock_csv(dir.path(), 5);
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_ubp"))
            .env("UBP_THREADS", threads)
            .args([
                "backtest",
                "--input",
                &input,
                "--samples",
                "30000",
                "--seed",
                "7",
                "--format",
                "csv",
            ])
            .args(["--output", out.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(o.status.success());
        (std::fs::read(out).unwrap(), o.stdout)
    };
    let a = run("a.csv", "4");
    let b = run("b.csv", "4");
    let c = run("c.csv", "1");
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn hot_stock_example_writes_trajectory() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("traj.csv");
    let o = ubp(&[
        "example",
        "hot-stock",
        "--periods",
        "12",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(out).unwrap();
    assert_eq!(csv.lines().count(), 14);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("universal bilinear wealth"));
}

#[test]
fn invalid_thread_count_is_rejected() {
    let o = Command::new(env!("CARGO_BIN_EXE_ubp"))
        .env("UBP_THREADS", "zero")
        .args(["bounds"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
