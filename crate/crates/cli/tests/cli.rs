use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use levyfit_cli::io::{ingest_csv, read_table, table_to_series};
use serde_json::Value;

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn levyfit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levyfit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let f = dir.join(name);
    fs::write(&f, text).unwrap();
    f
}

/// Shipped config with `edit` applied.
fn edited(name: &str, dir: &Path, edit: impl FnOnce(&mut Value)) -> PathBuf {
    let mut v: Value =
        serde_json::from_str(&fs::read_to_string(repo().join("configs").join(name)).unwrap())
            .unwrap();
    edit(&mut v);
    write(dir, name, &serde_json::to_string_pretty(&v).unwrap())
}

#[test]
fn ingest_without_time_column_takes_delta_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "a.csv", "x1\n0\n0.1\n0.2\n");
    let ts = ingest_csv(&f, Some(0.5)).unwrap();
    assert_eq!((ts.len(), ts.dim(), ts.delta()), (3, 1, 0.5));
    let err = ingest_csv(&f, None).unwrap_err();
    assert_eq!(err.code, 1);
}

#[test]
fn ingest_infers_delta_from_time_column() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "a.csv", "t,x1\n0,1\n0.01,2\n0.02,3\n");
    let ts = ingest_csv(&f, None).unwrap();
    assert!((ts.delta() - 0.01).abs() < 1e-15);
    assert_eq!(ts.column(0), vec![1.0, 2.0, 3.0]);
}

#[test]
fn ingest_rejects_bad_files() {
    let dir = tempfile::tempdir().unwrap();
    let uneven = write(dir.path(), "u.csv", "t,x1\n0,1\n0.01,2\n0.03,3\n");
    let e = ingest_csv(&uneven, None).unwrap_err();
    assert_eq!(e.code, 2, "{e}");

    let empty = write(dir.path(), "e.csv", "x1,x2\n1,2\n3,\n5,6\n");
    let e = ingest_csv(&empty, Some(1.0)).unwrap_err();
    assert_eq!(e.code, 2);
    assert!(
        e.message.contains("line 3") && e.message.contains("x2"),
        "{e}"
    );

    let nan = write(dir.path(), "n.csv", "x1\n1\nNaN\n");
    let e = ingest_csv(&nan, Some(1.0)).unwrap_err();
    assert!(e.message.contains("line 3"), "{e}");

    let short = write(dir.path(), "s.csv", "x1\n1\n");
    assert_eq!(ingest_csv(&short, Some(1.0)).unwrap_err().code, 2);

    let headless = write(dir.path(), "h.csv", "1,2\n3,4\n5,6\n");
    assert_eq!(read_table(&headless).unwrap_err().code, 2);
}

#[test]
fn table_columns_keep_their_order() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "m.csv", "t,x1,x2\n0,1,10\n1,2,20\n2,3,30\n");
    let table = read_table(&f).unwrap();
    assert_eq!(table.names, vec!["x1", "x2"]);
    let ts = table_to_series(&table, None).unwrap();
    assert_eq!(ts.row(2), &[3.0, 30.0]);
}

#[test]
fn pdf_closed_forms() {
    let g = levyfit(&["pdf", "--alpha", "2", "--beta", "0", "--x", "0"]);
    assert_eq!(code(&g), 0);
    let line = stdout(&g).lines().nth(1).unwrap().to_string();
    let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
    assert!((v - 0.2820948).abs() < 1e-7);

    let c = levyfit(&["pdf", "--alpha", "1", "--beta", "0", "--x", "1"]);
    let v: f64 = stdout(&c)
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((v - 0.1591549).abs() < 1e-7);
}

#[test]
fn cdf_grid_is_monotone() {
    let o = levyfit(&[
        "cdf", "--alpha", "1.5", "--beta", "-0.3", "--from", "-5", "--to", "5", "--points", "41",
    ]);
    assert_eq!(code(&o), 0);
    let vals: Vec<f64> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(vals.len(), 41);
    assert!(vals.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn simulate_shipped_landau_settings() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    let o = levyfit(&[
        "simulate",
        "--config",
        p(&repo().join("configs/landau_simulate.json")),
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(out.join("series.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x1"));
    assert_eq!(lines.count(), 100_000);
    assert!(!text.contains('\r'));
    let meta: Value =
        serde_json::from_str(&fs::read_to_string(out.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["rows"], 100_000);
    assert_eq!(meta["config"]["seed"], 3);
    assert_eq!(meta["config"]["simulation"]["burn_in"], 0);
}

#[test]
fn simulate_is_reproducible_and_rerunnable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = edited("landau_simulate.json", dir.path(), |v| {
        v["simulation"]["n_steps"] = 2000.into()
    });
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        assert_eq!(
            code(&levyfit(&["simulate", "--config", p(&cfg), "--out", p(d)])),
            0
        );
    }
    let first = fs::read(a.join("series.csv")).unwrap();
    assert_eq!(first, fs::read(b.join("series.csv")).unwrap());
    // the materialized config regenerates the same series
    let c = dir.path().join("c");
    assert_eq!(
        code(&levyfit(&[
            "simulate",
            "--config",
            p(&a.join("config.json")),
            "--out",
            p(&c)
        ])),
        0
    );
    assert_eq!(first, fs::read(c.join("series.csv")).unwrap());
    // a different seed gives a different path
    let d = dir.path().join("d");
    levyfit(&[
        "simulate",
        "--config",
        p(&cfg),
        "--out",
        p(&d),
        "--seed",
        "4",
    ]);
    assert_ne!(first, fs::read(d.join("series.csv")).unwrap());
}

#[test]
fn schema_errors_stop_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let wrong_len = edited("landau_simulate.json", dir.path(), |v| {
        v["simulation"]["x0"] = serde_json::json!([1.0, 2.0])
    });
    let o = levyfit(&["simulate", "--config", p(&wrong_len), "--out", p(&out)]);
    assert_eq!(code(&o), 1);
    assert!(!out.exists());

    let lv = edited("lv_simulate.json", dir.path(), |v| {
        v["model"]["dimensions"][1]["drift"]["a"] = serde_json::json!([0.1, 0.2])
    });
    assert_eq!(
        code(&levyfit(&[
            "simulate",
            "--config",
            p(&lv),
            "--out",
            p(&out)
        ])),
        1
    );

    let unknown = edited("landau_fit.json", dir.path(), |v| {
        v["colour"] = "blue".into()
    });
    let o = levyfit(&["fit", "--config", p(&unknown)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn two_dimensional_spline_drift_is_unsupported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = edited("lv_fit.json", dir.path(), |v| {
        v["model"]["dimensions"][0]["drift"] =
            serde_json::json!({ "kind": "spline", "knots": [0, 1, 2], "ordinates": [0, 0, 0] })
    });
    let o = levyfit(&["fit", "--config", p(&cfg)]);
    assert_eq!(code(&o), 1);
    assert!(
        stderr(&o).contains("spline drift is only supported"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn landau_fit_report_residuals_and_potential() {
    let dir = tempfile::tempdir().unwrap();
    let sim_cfg = edited("landau_simulate.json", dir.path(), |v| {
        v["simulation"]["n_steps"] = 5000.into()
    });
    let sim = dir.path().join("sim");
    assert_eq!(
        code(&levyfit(&[
            "simulate",
            "--config",
            p(&sim_cfg),
            "--out",
            p(&sim)
        ])),
        0
    );
    let series = sim.join("series.csv");
    let out = dir.path().join("fit");
    let o = levyfit(&[
        "--threads",
        "2",
        "fit",
        "--config",
        p(&repo().join("configs/landau_fit.json")),
        "--data",
        p(&series),
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("converged: yes"));

    let raw = fs::read_to_string(out.join("report.json")).unwrap();
    let doc: Value = serde_json::from_str(&raw).unwrap();
    let params = doc["report"]["parameters"].as_array().unwrap();
    let names: Vec<&str> = params.iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["a", "b", "c", "alpha", "beta"]);
    assert!(params
        .iter()
        .all(|r| r["std_error"].as_f64().unwrap() > 0.0));
    assert_eq!(doc["config"]["fit"]["two_pass"], false);
    assert_eq!(doc["config"]["fit"]["options"]["tolerance"], 1e-8);
    assert!(raw.contains("\"tolerance\": 1.0000000000000000e-8"));

    let residuals = fs::read_to_string(out.join("residuals.csv")).unwrap();
    assert_eq!(residuals.lines().next(), Some("t,eta1"));
    assert_eq!(residuals.lines().count(), 5001);
    let again = levyfit(&[
        "residuals",
        "--model",
        p(&out.join("fitted_model.json")),
        "--data",
        p(&series),
    ]);
    assert_eq!(stdout(&again), residuals);

    let text = levyfit(&["report", "--input", p(&out.join("report.json"))]);
    assert_eq!(
        stdout(&text),
        fs::read_to_string(out.join("report.txt")).unwrap()
    );

    let pot = levyfit(&["potential", "--data", p(&series), "--grid", "50"]);
    assert_eq!(code(&pot), 0);
    let lines: Vec<String> = stdout(&pot).lines().map(String::from).collect();
    assert_eq!(lines[0], "x,U");
    assert_eq!(lines.len(), 51);
}

#[test]
fn lotka_volterra_fit_reports_21_estimates() {
    let dir = tempfile::tempdir().unwrap();
    let sim_cfg = edited("lv_simulate.json", dir.path(), |v| {
        v["simulation"]["n_steps"] = 3000.into()
    });
    let sim = dir.path().join("sim");
    assert_eq!(
        code(&levyfit(&[
            "simulate",
            "--config",
            p(&sim_cfg),
            "--out",
            p(&sim)
        ])),
        0
    );
    let out = dir.path().join("fit");
    let o = levyfit(&[
        "fit",
        "--config",
        p(&repo().join("configs/lv_fit.json")),
        "--data",
        p(&sim.join("series.csv")),
        "--out",
        p(&out),
    ]);
    assert!(code(&o) == 0 || code(&o) == 3, "{}", stderr(&o));
    let doc: Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let names: Vec<&str> = doc["report"]["parameters"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["name"].as_str().unwrap())
        .collect();
    assert_eq!(names.len(), 21);
    assert_eq!(&names[..4], ["r[1]", "a[1,1]", "a[1,2]", "a[1,3]"]);
    assert_eq!(doc["report"]["ks"].as_array().unwrap().len(), 3);
}

#[test]
fn missing_data_file_is_a_data_error() {
    let o = levyfit(&[
        "fit",
        "--config",
        p(&repo().join("configs/landau_fit.json")),
        "--data",
        "/nonexistent/series.csv",
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("ingest"), "{}", stderr(&o));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&levyfit(&["--help"])), 0);
    assert_eq!(code(&levyfit(&["--version"])), 0);
    assert_eq!(code(&levyfit(&["fit"])), 1);
}
