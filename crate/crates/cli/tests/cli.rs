use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tracebound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tracebound"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

const MATHIEU: &str =
    r#"{"geometry": {"d": 1, "lengths": [6.283185307179586]}, "potential": {"fourier": [{"n": [1], "re": 1.0}, {"n": [-1], "re": 1.0}]}}"#;
const FREE_2D: &str = r#"{"geometry": {"d": 2, "lengths": [6.283185307179586, 6.283185307179586]}}"#;

#[test]
fn identities_to_json_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = tracebound(&["--seed", "3", "--out", out.to_str().unwrap(), "verify-identities", "--trials", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["kind"], "identities");
    assert_eq!(v["config"]["seed"], 3);
    assert_eq!(v["summary"]["failed"], 0);
    assert!(v.get("wall_time_ms").is_none());
}

#[test]
fn reports_are_byte_identical() {
    let args = ["--format", "csv", "verify-identities", "--trials", "15", "--dim", "6"];
    let a = tracebound(&args);
    let b = tracebound(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("trial,dim,kind,projector_rank,max_relative_residual,pass\r\n"));
    assert_eq!(text.matches("\r\n").count(), 16);
}

#[test]
fn timing_is_opt_in() {
    let o = tracebound(&["--timing", "circle", "--x-max", "50", "--grid", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["wall_time_ms"].as_f64().unwrap() >= 0.0);
}

#[test]
fn model_file_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let mathieu = write(dir.path(), "mathieu.json", MATHIEU);
    let free = write(dir.path(), "free.json", FREE_2D);
    let cases: Vec<Vec<&str>> = vec![
        vec!["torus-spectrum", "--config", &mathieu, "--cutoff", "20", "--count", "5"],
        vec!["sum-rules", "--config", &mathieu, "--cutoff", "20", "--q", "1", "--n", "3"],
        vec!["bounds", "--config", &mathieu, "--cutoff", "20", "--n-max", "10"],
        vec!["bounds", "--config", &free, "--cutoff", "8", "--n-max", "30", "--checks", "lambda-next,legendre"],
        vec!["riesz", "--config", &free, "--z", "0.5:200:500"],
        vec!["lt-scan", "--config", &mathieu, "--z", "1", "--alphas", "0.2:1:geometric:4"],
        vec!["sphere", "--d", "2", "--levels", "15", "--n-max", "30"],
    ];
    for args in cases {
        let o = tracebound(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert!(v["summary"]["total"].as_u64().unwrap() > 0, "{args:?}");
    }
}

#[test]
fn failed_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let model = write(dir.path(), "free1.json", r#"{"geometry": {"d": 1, "lengths": [6.283185307179586]}}"#);
    let o = tracebound(&[
        "lt-scan",
        "--config",
        &model,
        "--z",
        "4",
        "--shift-factor",
        "0.95",
        "--alphas",
        "0.888888888888889:1.142857142857143:200",
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL scaled-riesz-monotone"));
}

#[test]
fn bad_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"experiment": {"kind": "circle", "radius": 3}}"#);
    let o = tracebound(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("radius"));

    let o = tracebound(&["riesz", "--config", "/nonexistent/model.json", "--z", "0:1:3"]);
    assert_eq!(o.status.code(), Some(2));

    let o = tracebound(&["circle", "--x-max", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn run_config_with_output_section() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("circle.csv");
    let cfg = write(
        dir.path(),
        "exp.json",
        &format!(
            r#"{{"seed": 1, "output": {{"path": "{}", "format": "csv"}}, "experiment": {{"kind": "circle", "x_max": 100, "grid": 4}}}}"#,
            out.display()
        ),
    );
    let o = tracebound(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.trim_end().split("\r\n").collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("x,R,"));
    assert!(lines[1].starts_with("2.5000000000000000e1,81,"), "{}", lines[1]);
}
