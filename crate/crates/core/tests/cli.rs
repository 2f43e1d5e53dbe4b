use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn linsys(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_linsys")).args(args).env_remove("LINSYS_THREADS").output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = linsys(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("linsys-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn analyze_reports_parameters_and_star() {
    let (code, out, _) = linsys(&["analyze", "SW", "--p", "3"]);
    assert_eq!(code, 0);
    assert!(out.contains(r#""r1":3"#) && out.contains(r#""r2":2"#) && out.contains(r#""star":true"#));
    let v = json(&["analyze", "S4AP"]);
    assert_eq!(v["star"], Value::Bool(false));
    let v = json(&["analyze", "S1"]);
    assert_eq!((v["r1"].as_u64(), v["r2"].as_u64(), v["L"].as_u64(), v["m_max"].as_u64()), (Some(5), Some(4), Some(4), Some(3)));
}

#[test]
fn input_errors_exit_one() {
    let path = scratch("unbalanced.lineq", "x1 + x2 = 0\n");
    let (code, _, err) = linsys(&["analyze", path.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("not balanced"));
    assert_eq!(linsys(&["analyze", "/no/such/file"]).0, 1);
    assert_eq!(linsys(&["frobnicate"]).0, 1);
    assert_eq!(linsys(&["behrend", "--n", "2", "--k", "2", "--materialize", "--p", "2"]).0, 1);
    assert_eq!(linsys(&["--help"]).0, 0);
}

#[test]
fn file_systems_parse() {
    let path = scratch("sw.lineq", "# the W shape\nx1 - x2 - x3 + x4 = 0\nx1 - 2x3 + x5 = 0\n");
    let v = json(&["analyze", path.to_str().unwrap()]);
    assert_eq!(v["L"].as_u64(), Some(2));
}

#[test]
fn numeric_subcommands() {
    let v = json(&["lambda", "--m", "1", "--alpha", "1/3", "--h", "2", "--rational", "--theta-n", "2"]);
    assert!((v["value"].as_f64().unwrap() - 2.755104613).abs() < 1e-8);
    assert_eq!(v["count_theta"], "3");
    let v = json(&["lambda", "--m", "1", "--alpha", "0.5", "--h", "2"]);
    assert_eq!(v["value"].as_f64(), Some(3.0));
    assert_eq!(linsys(&["lambda", "--m", "1", "--alpha", "1/3", "--h", "2", "--theta-n", "2"]).0, 1);
    let v = json(&["ctilde", "--r1", "3", "--r2", "2", "--L", "2", "--m", "2", "--d", "3"]);
    assert!(v["value"].as_f64().unwrap() / 3.0 <= 0.995);
    let v = json(&["star", "--r1", "3", "--r2", "0", "--L", "1"]);
    assert_eq!(v["holds"], Value::Bool(true));
    let v = json(&["upper", "S3AP", "--p", "3", "--n", "2"]);
    assert!((v["value"].as_f64().unwrap() - 7.5906).abs() < 1e-3);
}

#[test]
fn reduce_prints_the_chain() {
    let (code, out, _) = linsys(&["--format", "text", "reduce", "S3"]);
    assert_eq!(code, 0);
    assert!(out.contains("x_{1_2_6} - 2x_{3_4} + x5 = 0"));
    assert!(out.trim_end().ends_with("∅(1)"));
    let v = json(&["lower-bound", "S3", "--p", "5"]);
    assert_eq!(v["simple_base"].as_f64(), Some(2.5));
}

#[test]
fn behrend_lists_points() {
    let (code, out, _) = linsys(&["behrend", "--n", "2", "--k", "1", "--materialize", "--p", "3", "--format", "text"]);
    assert_eq!(code, 0);
    assert_eq!(out, "0,1\n1,0\n");
    let v = json(&["behrend", "--n", "12", "--k", "4"]);
    assert_eq!(v["meets_bound"], Value::Bool(true));
}

#[test]
fn search_and_verify() {
    let v = json(&["search", "--p", "3", "--n", "2"]);
    assert_eq!(v["value"].as_u64(), Some(4));
    assert_eq!(v["exhaustive"], Value::Bool(true));
    let free = scratch("free.csv", "0\n1\n");
    assert_eq!(linsys(&["verify", "--kind", "strong", "--set", free.to_str().unwrap(), "--p", "3"]).0, 0);
    let full = scratch("full.csv", "0\n1\n2\n");
    assert_eq!(linsys(&["verify", "--kind", "weak", "--set", full.to_str().unwrap(), "--p", "3"]).0, 2);
    let pair = scratch("pair.csv", "0\n1\n");
    assert_eq!(linsys(&["verify", "--kind", "strong", "--set", pair.to_str().unwrap(), "--p", "5", "--system", "SW"]).0, 2);
    let row = scratch("row.csv", "0,0,1,1,2\n");
    assert_eq!(linsys(&["verify", "--kind", "multicolor", "--set", row.to_str().unwrap(), "--p", "7", "--system", "SW"]).0, 0);
}

#[test]
fn certify_examples() {
    let v = json(&["certify", "S3", "--p", "3", "--n", "2"]);
    assert_eq!((v["steps"].as_u64(), v["b_tilde"].as_u64()), (Some(3), Some(2)));
    assert_eq!(v["sphere_set"]["verified"], Value::Bool(true));
    let v = json(&["certify", "SW", "--p", "3", "--n", "1"]);
    assert_eq!(v["chain"], "weak");
    assert_eq!(v["sandwich"]["lower"].as_f64(), Some(1.5));
    assert_eq!(v["sandwich"]["exact"].as_u64(), Some(3));
    assert!((v["sandwich"]["upper"].as_f64().unwrap() - 20.93).abs() < 0.01);
    let (code, out, _) = linsys(&["--format", "text", "certify", "SPP", "--p", "3"]);
    assert_eq!(code, 0);
    assert!(out.contains("no dominant subsystem; no lower bound derived"));
}

#[test]
fn threads_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_linsys"))
        .args(["search", "--p", "3", "--n", "2"])
        .env("LINSYS_THREADS", "3")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["value"].as_u64(), Some(4));
}

#[test]
fn selftest_negative_control_exits_two() {
    let (code, out, _) = linsys(&["--format", "text", "selftest", "--lambda-tol", "0.1", "--no-timing"]);
    assert_eq!(code, 2);
    let failing: Vec<&str> = out.lines().filter(|l| l.contains("FAIL")).collect();
    assert_eq!(failing.len(), 1);
    assert!(failing[0].starts_with("criterion  3"));
}
