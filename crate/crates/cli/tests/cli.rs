use std::process::Command;

use serde_json::Value;

fn tmlab() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_tmlab"));
    c.env_remove(tmlab::THREADS_ENV);
    c
}

fn json(args: &[&str]) -> Value {
    let out = tmlab().args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn tm_prefix_csv() {
    let out = tmlab().args(["tm", "--upto", "32", "--format", "csv"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let bits: String = text
        .lines()
        .filter(|l| !l.starts_with('#') && *l != "n,t")
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(bits, "01101001100101101001011001101001");
}

#[test]
fn json_artifacts_carry_required_fields() {
    for args in [
        vec!["tm", "--upto", "64", "--complexity", "4"],
        vec!["floor", "--f", "power:6/5", "--n", "1000", "--count", "3"],
        vec!["blockfreq", "--f", "power:6/5", "--N", "100000", "--T", "3"],
        vec!["density", "--f", "nlogn", "--to-exp", "14"],
        vec!["expsum", "--f", "power:6/5", "--A", "1024", "--alpha", "101"],
        vec!["fourier", "--lambda", "4,6", "--beta", "11"],
        vec!["fourier", "--lambda", "6", "--beta", "11", "--h", "-3", "--d", "5"],
        vec!["dissect", "--f", "power:6/5", "--A", "32768", "--L", "2", "--M", "3"],
        vec!["lemmas", "--f", "power:6/5", "--pairs", "100"],
        vec!["plan", "--f", "power:6/5", "--A", "32768"],
    ] {
        let doc = json(&args);
        for field in ["tool_version", "config", "results", "timing"] {
            assert!(doc.get(field).is_some(), "{args:?} lacks {field}");
        }
        assert_eq!(doc["config"]["subcommand"], args[0]);
    }
}

#[test]
fn floor_values() {
    let doc = json(&["floor", "--f", "power:6/5", "--n", "3", "--count", "2"]);
    let floors = doc["results"]["floors"].as_array().unwrap();
    assert_eq!(floors[0]["floor"], "3");
    assert_eq!(floors[1]["floor"], "5");
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| tmlab().args(args).output().unwrap().status.code();
    assert_eq!(code(&["floor", "--f", "power:6/5", "--n", "-3"]), Some(1));
    assert_eq!(code(&["floor", "--f", "power:six", "--n", "3"]), Some(1));
    assert_eq!(code(&["expsum", "--f", "power:6/5", "--A", "10", "--alpha", "0"]), Some(1));
    assert_eq!(code(&["fourier", "--lambda", "4", "--beta", "11", "--i", "0,0,0"]), Some(1));
    assert_eq!(code(&["fourier", "--lambda", "30", "--beta", "11"]), Some(2));
    assert_eq!(code(&["bogus"]), Some(1));
    assert_eq!(code(&["--help"]), Some(0));
    assert_eq!(code(&["--version"]), Some(0));
}

#[test]
fn diagnostics_go_to_stderr() {
    let out = tmlab().args(["floor", "--f", "nope", "--n", "3"]).output().unwrap();
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join(format!("tmlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("plan.csv");
    let out = tmlab()
        .args(["plan", "--f", "power:6/5", "--A", "32768", "--format", "csv", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.ends_with("0.1,11,1,11,121,11,false\n"), "{text}");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn thread_env_fallback() {
    let run = |env: Option<&str>| {
        let mut c = tmlab();
        c.args(["blockfreq", "--f", "power:5/4", "--N", "50000", "--T", "2", "--format", "csv"]);
        if let Some(v) = env {
            c.env(tmlab::THREADS_ENV, v);
        }
        c.output().unwrap()
    };
    let (a, b) = (run(Some("1")), run(Some("3")));
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(run(Some("zero")).status.code(), Some(1));
    let doc: Value = serde_json::from_slice(
        &tmlab()
            .env(tmlab::THREADS_ENV, "2")
            .args(["tm", "--upto", "8"])
            .output()
            .unwrap()
            .stdout,
    )
    .unwrap();
    assert_eq!(doc["timing"]["threads"], 2);
}

#[test]
fn parse_only_entry() {
    assert!(tmlab::parse_args(["tmlab", "plan", "--f", "nlogn", "--A", "64"]).is_ok());
    assert!(tmlab::parse_args(["tmlab", "plan", "--A", "64"]).is_err());
}
