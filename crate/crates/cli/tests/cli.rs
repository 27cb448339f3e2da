use std::process::{Command, Output};

use serde_json::Value;

fn finsler(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finsler")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn verify_passes_on_funk() {
    let o = finsler(&["verify", "--zoo", "funk", "--seed", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["passed"], true);
    assert_eq!(v["seed"], 3);
}

#[test]
fn injected_fault_fails_verification() {
    let o = finsler(&["verify", "--zoo", "funk", "--inject-e-scale", "2"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL mean-berwald-dual"));
}

#[test]
fn verify_is_deterministic() {
    let a = finsler(&["verify", "--zoo", "randers_generic", "--seed", "11"]);
    let b = finsler(&["verify", "--zoo", "randers_generic", "--seed", "11"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_errors_exit_with_two() {
    assert_eq!(code(&finsler(&["verify", "--zoo", "no_such_metric"])), 2);
    assert_eq!(code(&finsler(&["report"])), 2);
    assert_eq!(code(&finsler(&["frobnicate"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"metric": {"zoo": "funk"}, "colour": 3}"#).unwrap();
    assert_eq!(code(&finsler(&["verify", "--config", cfg.to_str().unwrap()])), 2);
}

#[test]
fn report_reads_points_and_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.csv");
    std::fs::write(&pts, "x1,x2,y1,y2\n0.1,0.2,1,0\n# comment\n0.0,0.0,0,1\n").unwrap();
    let out = dir.path().join("report.json");
    let o = finsler(&[
        "report",
        "--zoo",
        "randers_const",
        "--points",
        pts.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let points = v["points"].as_array().unwrap();
    assert_eq!(points.len(), 2);
    assert!((points[0]["f"].as_f64().unwrap() - 1.5).abs() < 1e-12);
}

#[test]
fn malformed_points_file_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.csv");
    std::fs::write(&pts, "x1,x2,y1,y2\n0.1,0.2,1,0\n0.1,oops,1,0\n").unwrap();
    let o = finsler(&["report", "--zoo", "funk", "--points", pts.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn verify_writes_nodal_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let nodal = dir.path().join("nodal.csv");
    let o = finsler(&[
        "verify",
        "--zoo",
        "funk",
        "--resolution",
        "128",
        "--format",
        "csv",
        "--nodal-csv",
        nodal.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).lines().count() > 7);
    let text = std::fs::read_to_string(&nodal).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().contains("residual"));
    assert!(lines.count() >= 128);
}

#[test]
fn under_resolved_fiber_exits_with_three() {
    let o = finsler(&["verify", "--zoo", "funk", "--resolution", "16"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("insufficient resolution"));
}

#[test]
fn classify_and_validate() {
    let o = finsler(&["classify", "--zoo", "euclidean"]);
    assert_eq!(code(&o), 0);
    assert!(stdout_json(&o)["labels"].as_array().unwrap().iter().any(|l| l == "Berwald"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("long_b.json");
    std::fs::write(
        &cfg,
        r#"{"metric": {"alpha_beta": {"a": [["1","0"],["0","1"]], "b": ["1.2","0"]}}}"#,
    )
    .unwrap();
    let o = finsler(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout_json(&o)["passed"], false);
    assert_eq!(code(&finsler(&["validate", "--zoo", "funk"])), 0);
}

#[test]
fn zoo_list() {
    let o = finsler(&["zoo", "list"]);
    assert_eq!(code(&o), 0);
    let names: Vec<String> = stdout_json(&o)
        .as_array()
        .unwrap()
        .iter()
        .map(|z| z["name"].as_str().unwrap().to_string())
        .collect();
    assert!(names.iter().any(|n| n == "funk"));
    let csv = finsler(&["zoo", "list", "--format", "csv"]);
    assert!(String::from_utf8_lossy(&csv.stdout).starts_with("name,params,summary"));
}
