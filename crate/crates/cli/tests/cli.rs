use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn magspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magspec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_config(dir: &TempDir, name: &str, ends: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, format!(r#"{{"schema_version": 1, "ends": [{ends}]}}"#)).unwrap();
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const FUNNEL_1: &str = r#"{"type": "funnel", "tau": 1, "t0": 0, "field": {"kind": "cosh-poly", "coeffs": [1]}}"#;
const FUNNEL_3: &str = r#"{"type": "funnel", "tau": 1, "t0": 0, "field": {"kind": "cosh-poly", "coeffs": [3]}}"#;

fn cusp_y(xi: f64) -> String {
    format!(r#"{{"type": "cusp", "L": 1, "t0": 0, "xi": {xi}, "field": {{"kind": "y-poly", "coeffs": [0, 1]}}}}"#)
}

#[test]
fn landau_quantities() {
    let o = magspec(&["nlandau", "--mu", "5", "--b", "1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "2\n");
    assert_eq!(stdout(&magspec(&["nlandau", "--mu", "6", "--b", "0"])), "3\n");
    assert_eq!(stdout(&magspec(&["sset", "--beta", "2.5"])), "[2.5,5.5]\n");
    assert_eq!(stdout(&magspec(&["sset", "--beta", "-2.5"])), "[2.5,5.5]\n");
    assert_eq!(stdout(&magspec(&["sset", "--beta", "0.4"])), "[]\n");
}

#[test]
fn essential_example() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "f.json", &format!("{FUNNEL_1}, {FUNNEL_3}"));
    let o = magspec(&["essential", "--config", p(&cfg)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "{\"bottom\":1.25,\"points\":[1.0],\"empty\":false}\n");
}

#[test]
fn compare_writes_the_documented_csv() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", &cusp_y(0.0));
    let out = dir.path().join("table.csv");
    let o = magspec(&[
        "compare",
        "--config",
        p(&cfg),
        "--lambdas",
        "50,100,200",
        "--out",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.split_terminator("\r\n").collect();
    assert_eq!(lines[0], "lambda,count,weyl,lower,upper,ratio,converged");
    assert_eq!(lines.len(), 4);
    assert!(!text.replace("\r\n", "").contains('\n'));
    for (line, lambda) in lines[1..].iter().zip(["50", "100", "200"]) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 7);
        assert_eq!(cells[0].parse::<f64>().unwrap(), lambda.parse::<f64>().unwrap());
        let count: f64 = cells[1].parse().unwrap();
        let weyl: f64 = cells[2].parse().unwrap();
        let (lower, upper): (f64, f64) = (cells[3].parse().unwrap(), cells[4].parse().unwrap());
        assert!(lower <= weyl && weyl <= upper);
        assert_eq!(cells[5].parse::<f64>().unwrap(), count / weyl);
        assert_eq!(cells[6], "true");
    }

    // Same inputs, same bytes; a geometric list gives the same rows.
    let again = magspec(&["compare", "--config", p(&cfg), "--lambdas", "50,100,200"]);
    assert_eq!(stdout(&again), text);
    let geom = magspec(&["compare", "--config", p(&cfg), "--lambda-geom", "50,2,3"]);
    assert_eq!(stdout(&geom), text);
}

#[test]
fn fit_reports_slope_and_alpha() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", &cusp_y(0.0));
    let o = magspec(&["fit", "--config", p(&cfg), "--lambda-geom", "100,2,4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let slope = v["slope"].as_f64().unwrap();
    assert!((0.9..1.2).contains(&slope), "{slope}");
    assert!(v["alpha"].as_f64().unwrap() > 0.0);
}

#[test]
fn count_end_is_gauge_invariant() {
    let dir = TempDir::new().unwrap();
    let a = write_config(&dir, "a.json", &cusp_y(0.3));
    let b = write_config(&dir, "b.json", &cusp_y(1.3));
    let run = |cfg: &Path| {
        let o = magspec(&[
            "count-end",
            "--config",
            p(cfg),
            "--end",
            "0",
            "--lambda",
            "120",
            "--json",
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        serde_json::from_str::<serde_json::Value>(&stdout(&o)).unwrap()
    };
    let (ra, rb) = (run(&a), run(&b));
    assert_eq!(ra["count"], rb["count"]);
    assert_eq!(ra["converged"], true);
    assert!(ra["count"].as_u64().unwrap() > 0);
}

#[test]
fn weyl_prints_a_number() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", &cusp_y(0.0));
    let o = magspec(&["weyl", "--config", p(&cfg), "--lambda", "0.2"]);
    assert_eq!(stdout(&o), "0\n");
    let o = magspec(&["weyl", "--config", p(&cfg), "--lambda", "1000"]);
    let w: f64 = stdout(&o).trim().parse().unwrap();
    assert!((w / 500.0 - 1.0).abs() < 0.05);
}

#[test]
fn holonomy_and_membership() {
    let dir = TempDir::new().unwrap();
    // Gauge limit is xi - L b e^{-t0} = xi - 2.
    let cusp = |xi: f64| {
        format!(r#"{{"type": "cusp", "L": 1, "t0": 0, "xi": {xi}, "field": {{"kind": "y-poly", "coeffs": [2]}}}}"#)
    };
    let cfg = write_config(&dir, "h.json", &format!("{FUNNEL_1}, {}, {}", cusp(2.0), cusp(2.5)));
    let get = |end: &str| {
        let o = magspec(&["holonomy", "--config", p(&cfg), "--end", end]);
        assert!(o.status.success(), "{}", stderr(&o));
        serde_json::from_str::<serde_json::Value>(&stdout(&o)).unwrap()
    };
    let zero = get("1");
    assert_eq!(zero["in_j1a"], true);
    assert!(zero["holonomy"].as_f64().unwrap().abs() < 1e-12);
    let half = get("2");
    assert_eq!(half["in_j1a"], false);
    assert!((half["holonomy"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-12);

    let o = magspec(&["holonomy", "--config", p(&cfg), "--end", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--end"));
}

#[test]
fn morse_check_accepts_a_window() {
    let o = magspec(&["morse-check", "--beta", "2.5", "--grid", "8000", "--window", "-20,4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["predicted"], serde_json::json!([2.5, 5.5]));
    assert!(v["max_abs_err"].as_f64().unwrap() < 1e-3);
    let o = magspec(&["morse-check", "--beta", "2.5", "--window", "4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--window"));
}

#[test]
fn hypcheck_reports_every_end() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", &format!("{}, {}", cusp_y(0.0), cusp_y(0.5)));
    let o = magspec(&["hypcheck", "--config", p(&cfg)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["ends"].as_array().unwrap().len(), 2);
    assert_eq!(v["hyp_w"]["holds"], true);
}

#[test]
fn configuration_errors_exit_one_and_name_the_field() {
    let dir = TempDir::new().unwrap();
    let bad = write_config(
        &dir,
        "bad.json",
        r#"{"type": "funnel", "tau": 0, "t0": 0, "field": {"kind": "cosh-poly", "coeffs": [0, 1]}}"#,
    );
    let o = magspec(&["weyl", "--config", p(&bad), "--lambda", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("ends[0].tau"), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());

    let o = magspec(&[
        "weyl",
        "--config",
        p(&dir.path().join("missing.json")),
        "--lambda",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--config"));

    let bounded = write_config(&dir, "b.json", FUNNEL_1);
    let o = magspec(&["weyl", "--config", p(&bounded), "--lambda", "10"]);
    assert_eq!(o.status.code(), Some(1));

    let o = magspec(&["nlandau", "--mu", "5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--b"));

    let o = magspec(&["nlandau", "--mu", "5", "--b", "-1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--b"));

    assert_eq!(magspec(&["--help"]).status.code(), Some(0));
}

#[test]
fn unconverged_numerics_exit_two_with_output() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("short.json");
    std::fs::write(
        &path,
        format!(
            r#"{{"schema_version": 1, "ends": [{}], "numerics": {{"t_max": 3.0}}}}"#,
            cusp_y(0.0)
        ),
    )
    .unwrap();
    let o = magspec(&["count-end", "--config", p(&path), "--end", "0", "--lambda", "400"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("converged=false"));
}
