use std::io::Write;
use std::process::{Command, Output, Stdio};

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_afriat"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary starts");
    child.stdin.take().expect("piped").write_all(stdin.as_bytes()).expect("write stdin");
    child.wait_with_output().expect("binary finishes")
}

fn stdout(out: &Output) -> &str {
    std::str::from_utf8(&out.stdout).expect("utf-8")
}

#[test]
fn check_verdicts_and_exit_codes() {
    let out = run(&["rp", "check"], r#"{"n":2,"R":[[0,1],[1,0]]}"#);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "{\"verdict\":\"consistent\"}\n");

    let out = run(&["rp", "check"], r#"{"n":2,"R":[[0,-1],[-1,0]]}"#);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout(&out), "{\"verdict\":\"violation\",\"cycle\":[1,2]}\n");
}

#[test]
fn housing_prices_are_verified() {
    let out = run(&["housing", "prices"], r#"{"n":2,"c":[[3,2],[5,3]]}"#);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(stdout(&out)).unwrap();
    assert_eq!(doc["verified"], serde_json::Value::Bool(true));
    let p = doc["prices"].as_array().unwrap();
    assert!(p[1].as_f64().unwrap() > p[0].as_f64().unwrap());
}

#[test]
fn demand_file_by_extension() {
    let dir = std::env::temp_dir().join(format!("afriat-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("demand.csv");
    std::fs::write(&path, "id,p1,p2,x1,x2\n1,2,1,1,0\n2,1,2,0,1\n").unwrap();
    let out = run(&["rp", "afriat-index", "--input", path.to_str().unwrap()], "");
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout(&out), "{\"e\":0.5,\"breakpoint\":[1,2],\"attained\":true}\n");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn errors_exit_two_with_message() {
    let out = run(&["rp", "frobnicate"], "");
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let out = run(&["rp", "check"], r#"{"n":2,"R":[[0.5,-1],[-1,0]]}"#);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    assert!(out.stdout.is_empty());

    let out = run(&["rp", "check", "--kind", "demand-csv"], "id,p1,x1\n");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no observations"));
}

#[test]
fn exit_codes_ignore_tolerance_formatting() {
    for tol in ["1e-9", "0.000000001", "1E-9"] {
        let out = run(&["--tol", tol, "housing", "pareto"], r#"{"n":2,"c":[[2,1],[1,2]]}"#);
        assert_eq!(out.status.code(), Some(1));
    }
}
