use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn spiderbm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spiderbm"))
        .args(args)
        .env_remove("SPIDERBM_OUTPUT_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn first_moment_of_unequal_legs() {
    let o = spiderbm(&["exit-time", "--lengths", "1,2,2", "--moments", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header, ["quantity", "argument", "analytic_value", "oracle_value", "abs_error"]);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "moment");
    let v: f64 = rows[0][2].parse().unwrap();
    assert!((v - 2.5).abs() < 1e-12);
}

#[test]
fn malformed_lengths_are_usage_errors() {
    for bad in ["1,x,2", "1,-1", "1,,2", "0"] {
        let o = spiderbm(&["exit-time", "--lengths", bad]);
        assert_eq!(o.status.code(), Some(2), "{bad}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn kernel_suite_passes() {
    let o = spiderbm(&["verify", "--suite", "kernels"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("criterion  1"));
    assert!(text.contains("2 of 2 criteria passed"));
}

#[test]
fn unknown_suite_and_missing_flags_exit_two() {
    assert_eq!(spiderbm(&["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(spiderbm(&["density", "--t", "1"]).status.code(), Some(2));
    assert_eq!(spiderbm(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(spiderbm(&["--help"]).status.code(), Some(0));
}

#[test]
fn density_rows_carry_the_header() {
    let o = spiderbm(&["density", "--n-legs", "3", "--t", "0.5,1", "--to", "1:0.5,origin"]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = csv_rows(&stdout(&o));
    assert_eq!(header, ["t", "from_leg", "from_x", "to_leg", "to_x", "density"]);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[5].parse::<f64>().unwrap() >= 0.0));
}

#[test]
fn json_format_is_a_table() {
    let o = spiderbm(&["density", "--n-legs", "2", "--t", "1", "--to", "1:1", "--format", "json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "density");
    assert_eq!(v["rows"].as_array().unwrap().len(), 1);
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"command": "exit-time", "graph": {"n_legs": 3, "lengths": [1, 2, 2]}, "params": {"moments": 2}}"#,
    );
    let (_, rows) = csv_rows(&stdout(&spiderbm(&["exit-time", "--config", &cfg])));
    assert_eq!(rows.len(), 2);
    let (_, rows) = csv_rows(&stdout(&spiderbm(&["exit-time", "--config", &cfg, "--moments", "1"])));
    assert_eq!(rows.len(), 1);
    let bad = write(dir.path(), "d.json", r#"{"command": "exit-time", "params": {"bogus": 1}}"#);
    assert_eq!(spiderbm(&["exit-time", "--config", &bad, "--lengths", "1,1"]).status.code(), Some(2));
}

#[test]
fn output_directory_variable_sets_the_default_destination() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_spiderbm"))
        .args(["sample", "--experiment", "cover", "--n-legs", "5", "--replicas", "10", "--exact-cycles"])
        .env("SPIDERBM_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(dir.path().join("sample.csv")).unwrap();
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["stream_id", "cover_time", "n_cycles"]);
    assert_eq!(rows.len(), 10);
}

#[test]
fn limits_report_is_reproducible() {
    let run = || {
        let o = spiderbm(&["limits", "--law", "stable-cover", "--replicas", "500", "--n-legs", "50", "--seed", "9"]);
        assert!(matches!(o.status.code(), Some(0) | Some(1)));
        let mut v: Value = serde_json::from_slice(&o.stdout).unwrap();
        v.as_object_mut().unwrap().remove("wall_clock_seconds");
        v
    };
    let a = run();
    assert_eq!(a, run());
    assert_eq!(a["law"], "stable-cover");
    assert!(a["ks"].as_f64().unwrap() < 1.0);
}

#[test]
fn spectral_heat_kernel_matches_the_infinite_spider_at_short_times() {
    let o = spiderbm(&["spectral", "--action", "heatkernel", "--n-legs", "3", "--t", "0.05", "--to", "1:0.3"]);
    let (_, rows) = csv_rows(&stdout(&o));
    let spectral: f64 = rows[0][5].parse().unwrap();
    let free: f64 = rows[0][7].parse().unwrap();
    assert!((spectral - free).abs() < 1e-10);
}

#[test]
fn sample_output_is_seeded() {
    let args = ["sample", "--experiment", "exit", "--lengths", "1,1,1", "--replicas", "20", "--seed", "3"];
    assert_eq!(spiderbm(&args).stdout, spiderbm(&args).stdout);
}
