use std::collections::HashMap;
use std::path::Path;
use std::process::{Command, Output};

fn loattack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loattack"))
        .args(args)
        .env_remove("LOATTACK_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

type Row = HashMap<String, String>;

fn read_csv(path: &Path) -> Vec<Row> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let headers = r.headers().unwrap().clone();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            headers.iter().map(String::from).zip(rec.iter().map(String::from)).collect()
        })
        .collect()
}

fn num(row: &Row, key: &str) -> f64 {
    row[key].parse().unwrap_or_else(|_| panic!("{key} = {:?}", row[key]))
}

fn report_field(text: &str, name: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{name}: ")))
        .unwrap()
        .parse()
        .unwrap()
}

/// Arithmetic relations between report columns, up to 9-digit rounding.
fn assert_report_invariants(row: &Row) {
    let tol = |x: f64| 2e-8 * x.abs().max(1.0);
    let (i_ab, h_t, h_p) = (num(row, "i_ab"), num(row, "holevo_true"), num(row, "holevo_pseudo"));
    let (k_t, k_p, int) = (num(row, "k_true"), num(row, "k_pseudo"), num(row, "intercepted"));
    assert!((k_t - (i_ab - h_t)).abs() <= tol(i_ab), "{row:?}");
    assert!((k_p - (i_ab - h_p)).abs() <= tol(i_ab), "{row:?}");
    assert!((int - (k_p - k_t)).abs() <= tol(k_p), "{row:?}");
    assert!(int >= -1e-12, "{row:?}");
    assert_eq!(row["secure"] == "true", k_t > 0.0, "{row:?}");
    let eta = num(row, "eta");
    assert!((num(row, "one_minus_eta") - (1.0 - eta)).abs() < 1e-9);
}

#[test]
fn keyrate_command() {
    let o = loattack(&["keyrate", "--vs", "20", "--t", "0.5", "--eta", "1", "--direction", "dr"]);
    assert_eq!(code(&o), 0);
    assert_eq!(report_field(&stdout(&o), "intercepted"), 0.0);

    let o = loattack(&["keyrate", "--vs", "20", "--distance-km", "20", "--eta", "0.92", "--direction", "rr"]);
    let text = stdout(&o);
    assert!((report_field(&text, "transmission") - 0.398107).abs() < 1e-12);
    assert!(report_field(&text, "k_true") < 0.01 * report_field(&text, "k_pseudo"));

    let o = loattack(&["keyrate", "--vs", "20", "--t", "0.5", "--eta", "0.95"]);
    let text = stdout(&o);
    let (kt, kp) = (report_field(&text, "k_true"), report_field(&text, "k_pseudo"));
    assert!(kp > kt);
    assert!((report_field(&text, "intercepted") - (kp - kt)).abs() < 2e-6);
}

#[test]
fn keyrate_config_errors_exit_2() {
    for args in [
        vec!["keyrate", "--t", "0.5", "--eta", "0"],
        vec!["keyrate", "--t", "1.5"],
        vec!["keyrate", "--t", "1", "--eta", "0.9"],
        vec!["keyrate", "--t", "0.5", "--noise", "0.5"],
        vec!["keyrate"],
        vec!["keyrate", "--t", "0.5", "--direction", "sideways"],
    ] {
        let o = loattack(&args);
        assert_eq!(code(&o), 2, "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn figure_rows_satisfy_report_invariants() {
    let dir = tempfile::tempdir().unwrap();
    for id in ["2", "3", "4", "5"] {
        let path = dir.path().join(format!("fig{id}.csv"));
        let o = loattack(&["figure", "--id", id, "--out", path.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        let rows = read_csv(&path);
        assert!(!rows.is_empty());
        for row in &rows {
            assert_report_invariants(row);
        }
        for row in rows.iter().filter(|r| r["eta"] == "1") {
            assert!((num(row, "k_pseudo") - num(row, "k_true")).abs() <= 1e-12);
            assert_eq!(num(row, "intercepted"), 0.0);
        }
    }
}

#[test]
fn figure_three_twenty_km_series() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig3.csv");
    loattack(&["figure", "--id", "3", "--out", path.to_str().unwrap()]);
    let rows: Vec<Row> = read_csv(&path).into_iter().filter(|r| r["distance_km"] == "20").collect();
    assert_eq!(rows.len(), 151);
    let first_insecure = rows.iter().find(|r| r["secure"] == "false").unwrap();
    let x = num(first_insecure, "one_minus_eta");
    assert!((x - 0.08).abs() <= 0.02, "{x}");
}

#[test]
fn figure_four_crosses_near_half() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig4.csv");
    loattack(&["figure", "--id", "4", "--out", path.to_str().unwrap()]);
    let rows = read_csv(&path);
    let first_positive = |series: &[&Row], key: &str| {
        let r = series.iter().find(|r| num(r, key) > 0.0).unwrap();
        num(r, "transmission")
    };
    let mut previous = f64::INFINITY;
    for eta in ["0.85", "0.9", "0.95", "0.99", "1"] {
        let series: Vec<&Row> = rows.iter().filter(|r| r["eta"] == eta).collect();
        assert_eq!(series.len(), 98);
        let e: f64 = eta.parse().unwrap();
        // Bob sees a pure-loss channel of transmission ηT
        let t_pseudo = first_positive(&series, "k_pseudo");
        assert!((e * t_pseudo - 0.508).abs() <= 0.01, "eta {eta}: {t_pseudo}");
        // the hidden excess noise pushes the true crossing above it
        let t_true = first_positive(&series, "k_true");
        assert!(t_true >= t_pseudo && t_true < previous, "eta {eta}: {t_true}");
        previous = t_true;
    }
    // with no excess noise at all, the 3 dB point
    assert!((0.5..=0.51).contains(&previous), "{previous}");
}

#[test]
fn figure_output_is_deterministic_and_json_mirrors_csv() {
    let a = loattack(&["figure", "--id", "3"]);
    let b = loattack(&["figure", "--id", "3"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);

    let j = loattack(&["figure", "--id", "3", "--format", "json"]);
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&j.stdout).unwrap();
    assert_eq!(rows.len(), stdout(&a).lines().count() - 1);
    assert_eq!(rows[0]["distance_km"], 10.0);
}

#[test]
fn figure_errors() {
    assert_eq!(code(&loattack(&["figure", "--id", "7"])), 2);
    let o = loattack(&["figure", "--id", "2", "--out", "/nonexistent-dir/fig.csv"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn sweep_config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    let out = dir.path().join("sweep.csv");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"axis": "distance", "start": 0.5, "stop": 50, "step": 0.5, "eta": 0.9,
                "direction": "rr", "out": "{}"}}"#,
            out.display()
        ),
    )
    .unwrap();
    let o = loattack(&["sweep", "--config", cfg.to_str().unwrap(), "--eta", "0.95"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&out);
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().all(|r| r["eta"] == "0.95"));
    assert_eq!(rows[99]["distance_km"], "50");
    assert!((num(&rows[99], "transmission") - 0.1).abs() < 1e-9);
    for row in &rows {
        assert_report_invariants(row);
    }
}

#[test]
fn sweep_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"axis": "T", "start": 0.1, "stop": 0.5, "step": 0.1, "colour": 1}"#).unwrap();
    assert_eq!(code(&loattack(&["sweep", "--config", cfg.to_str().unwrap()])), 2);
    assert_eq!(code(&loattack(&["sweep", "--config", "/nonexistent/cfg.json"])), 3);
    let empty = ["sweep", "--axis", "T", "--start", "0.5", "--stop", "0.1", "--step", "0.1"];
    assert_eq!(code(&loattack(&empty)), 2);
    let zero_step = ["sweep", "--axis", "T", "--start", "0.1", "--stop", "0.5", "--step", "0"];
    assert_eq!(code(&loattack(&zero_step)), 2);
    assert_eq!(code(&loattack(&["sweep", "--t", "0.5"])), 2);
}

#[test]
fn simulate_examples() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.json");
    std::fs::write(&cfg, r#"{"t": 0.5, "eta": 0.9, "n_pulses": 1000000, "seed": 1}"#).unwrap();
    let a = loattack(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&a), 0);
    let path = dir.path().join("a.csv");
    std::fs::write(&path, &a.stdout).unwrap();
    let row = &read_csv(&path)[0];
    assert!((num(row, "t_hat") - 0.45).abs() < 0.005);
    assert!(num(row, "eps_hat").abs() < 0.02);
    assert_eq!(num(row, "t_analytic"), 0.45);
    assert_eq!(num(row, "eps_analytic"), 0.0);

    let b = loattack(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(a.stdout, b.stdout);

    let ctrl = loattack(&["simulate", "--t", "0.5", "--eta", "1", "--n-pulses", "1000000"]);
    std::fs::write(&path, &ctrl.stdout).unwrap();
    let row = &read_csv(&path)[0];
    assert!(num(row, "eps_hat").abs() < 0.02);
    assert_eq!(row["seed"], "1");
}

#[test]
fn simulate_seed_precedence() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_loattack"));
        c.args(["simulate", "--t", "0.4", "--eta", "0.95", "--n-pulses", "20000"]).args(extra);
        match env {
            Some(s) => c.env("LOATTACK_SEED", s),
            None => c.env_remove("LOATTACK_SEED"),
        };
        c.output().unwrap()
    };
    let default = run(None, &[]);
    let seven = run(Some("7"), &[]);
    assert_ne!(default.stdout, seven.stdout);
    assert!(stdout(&seven).contains(",20000,7,"));
    assert_eq!(run(Some("7"), &["--seed", "1"]).stdout, default.stdout);
    assert_eq!(code(&run(Some("x"), &[])), 2);
}

#[test]
fn simulate_rejects_small_runs() {
    let o = loattack(&["simulate", "--t", "0.5", "--eta", "0.9", "--n-pulses", "9999"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn check_command() {
    let o = loattack(&["check"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("points checked: 304"));

    let o = loattack(&["check", "--perturb", "1e-6"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("FAIL V_S=1 T=0.05 eta=0.85"));

    assert_eq!(code(&loattack(&["check", "--t-min", "0.9", "--t-max", "0.1"])), 2);
    assert_eq!(code(&loattack(&["check", "--t-step", "0"])), 2);
}
