//! The installed binary and its exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn xiboot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xiboot"))
        .args(args)
        .output()
        .expect("spawn xiboot")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn linear_data(n: usize) -> String {
    let mut s = String::from("x,y\n");
    for i in 0..n {
        let t = i as f64 / n as f64;
        s.push_str(&format!(
            "{t},{}\n",
            (7.0 * t).sin() + 0.1 * ((i * 37) % 11) as f64
        ));
    }
    s
}

#[test]
fn xi_reports_both_forms_on_tie_free_data() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "d.csv", "x,y\n1,1\n2,2\n3,3\n4,4\n5,5\n");
    let out = xiboot(&["xi", &path, "--format", "json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["n"], 5);
    assert!((v["xi_general"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(v["xi_general"], v["xi_simple"]);
}

#[test]
fn xi_reports_ties_in_text() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "d.tsv", "1\t1\n1\t2\n2\t2\n3\t5\n");
    let out = xiboot(&["xi", &path]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("n/a (ties present)"), "{text}");
    assert!(text.contains("x ties      2 values in 1 groups"), "{text}");
}

#[test]
fn malformed_row_exits_four_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "d.csv", "x,y\n1,2\n3,4\n5,abc\n");
    let out = xiboot(&["xi", &path]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains(":4:"), "{}", stderr(&out));
}

#[test]
fn one_row_is_a_parameter_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "d.csv", "x,y\n1,2\n");
    assert_eq!(xiboot(&["xi", &path]).status.code(), Some(2));
}

#[test]
fn bootstrap_prints_warning_and_intervals() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "d.csv", &linear_data(200));
    let out = xiboot(&[
        "bootstrap",
        &path,
        "-B",
        "200",
        "--alpha",
        "0.1",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    for needle in [
        "WARNING",
        "not valid inference",
        "V-B1",
        "V-B2",
        "HB1 90%",
        "HB2 90%",
        "replicate mean",
    ] {
        assert!(text.contains(needle), "missing {needle} in\n{text}");
    }
    let again = xiboot(&[
        "bootstrap",
        &path,
        "-B",
        "200",
        "--alpha",
        "0.1",
        "--seed",
        "3",
    ]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn bootstrap_json_and_bad_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "d.csv", &linear_data(50));
    let out = xiboot(&["--format", "json", "bootstrap", &path, "-B", "50"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["bootstrap_size"], 50);
    assert!(v["hb2"][0].as_f64().unwrap() <= v["hb2"][1].as_f64().unwrap());
    assert!(stderr(&out).contains("WARNING"));
    assert_eq!(
        xiboot(&["bootstrap", &path, "--alpha", "1.5"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn simulate_output_is_worker_independent() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv").display().to_string();
    let b = dir.path().join("b.csv").display().to_string();
    let base = [
        "simulate", "--rho", "0,0.5", "--n", "40", "--reps", "12", "--boot", "30", "--seed", "5",
    ];
    let one = xiboot(&[&base[..], &["--workers", "1", "--output", &a]].concat());
    let four = xiboot(&[&base[..], &["--workers", "4", "--output", &b]].concat());
    assert_eq!(one.status.code(), Some(0), "{}", stderr(&one));
    assert_eq!(four.status.code(), Some(0));
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!ta.is_empty());
    assert_eq!(ta, tb);
}

#[test]
fn simulate_smoke_json_schema() {
    let out = xiboot(&[
        "simulate", "--rho", "0", "--n", "10", "--reps", "2", "--boot", "2", "--alpha", "0.05",
        "--alpha", "0.2", "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["config"]["alphas"], serde_json::json!([0.05, 0.2]));
    let cell = &v["cells"][0];
    for c in cell["coverage"].as_array().unwrap() {
        let p = c["value"].as_f64().unwrap();
        assert!([0.0, 0.5, 1.0].contains(&p));
    }
    assert!(cell["rmse_b1"]["value"].as_f64().unwrap() >= 0.0);
    assert!(cell.get("wall_time").is_none());
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", "# desk run\nreps = 3\nn = 12\n");
    let out = xiboot(&[
        "simulate", "--rho", "0", "--n", "500", "--reps", "50", "--boot", "4", "--config", &cfg,
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("0,12,V-B1,rmse,"), "{row}");
    assert!(row.contains(",3,4,"), "{row}");
}

#[test]
fn config_errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "a.cfg", "reps=3\ncolour=blue\n");
    let out = xiboot(&["simulate", "--config", &unknown]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("a.cfg:2"), "{}", stderr(&out));
    let bad = write(dir.path(), "b.cfg", "rho=0.2\n");
    let out = xiboot(&[
        "simulate", "--n", "10", "--reps", "2", "--boot", "2", "--config", &bad,
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("variance_targets"));
    let missing = xiboot(&["simulate", "--config", "/nonexistent/run.cfg"]);
    assert_eq!(missing.status.code(), Some(4));
}

#[test]
fn verify_theory_fast_passes() {
    let out = xiboot(&["verify-theory", "--level", "fast", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("name,observed,expected,tolerance,passed,detail"));
    assert!(!text.contains(",false,"));
}

#[test]
fn usage_errors() {
    assert_eq!(xiboot(&[]).status.code(), Some(2));
    assert_eq!(
        xiboot(&["simulate", "--workers", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        xiboot(&["verify-theory", "--level", "slow"]).status.code(),
        Some(2)
    );
}
