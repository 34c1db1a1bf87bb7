use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use qinstrument::format::serialize_instrument;
use qinstrument::{build_example_family, build_nonrepeatable_sibling};
use serde_json::Value;

fn qinstr(args: &[&str], out_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qinstr")).args(args).env("QINSTR_OUT_DIR", out_dir).output().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn certify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    let bad = dir.path().join("bad.json");
    fs::write(&good, serialize_instrument(&build_example_family(2, &[0.5, 0.5]).unwrap())).unwrap();
    fs::write(&bad, serialize_instrument(&build_nonrepeatable_sibling(2, &[0.5, 0.5]).unwrap())).unwrap();

    let out = qinstr(&["certify", good.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(read_json(&dir.path().join("certification.json"))["report"]["repeatable"], true);

    let report = dir.path().join("bad-report.json");
    let out = qinstr(&["certify", bad.to_str().unwrap(), "-o", report.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let v = read_json(&report);
    assert_eq!(v["report"]["repeatable"], false);
    assert!(!v["report"]["witnesses"].as_array().unwrap().is_empty());
}

#[test]
fn malformed_input_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    fs::write(&path, "{\n  \"schemaVersion\": \"1\",\n  \"outcomes\": [ }\n").unwrap();
    let out = qinstr(&["certify", path.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let out = qinstr(&["certify", dir.path().join("missing.json").to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn demo_bundle_is_complete() {
    let dir = tempfile::tempdir().unwrap();
    let out = qinstr(&["demo", "binary", "--p1", "0.25", "--p2", "0.5"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let bundle = dir.path().join("binary");
    for name in ["instrument.json", "certification.json", "povm.json", "classification.json", "wold.json", "trajectory.jsonl"] {
        assert!(bundle.join(name).is_file(), "{name}");
    }
    let lines = fs::read_to_string(bundle.join("trajectory.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 11);
    for line in lines.lines() {
        serde_json::from_str::<Value>(line).unwrap();
    }
}

#[test]
fn simulate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("ex1.json");
    fs::write(&inst, serialize_instrument(&build_example_family(3, &[0.2, 0.3, 0.5]).unwrap())).unwrap();
    let run = |log: &str| {
        let log = dir.path().join(log);
        let out = qinstr(
            &["--seed", "11", "simulate", inst.to_str().unwrap(), "--steps", "6", "--initial", "[[0,[3,0]],[4,[0,4]]]", "--log", log.to_str().unwrap()],
            dir.path(),
        );
        assert_eq!(out.status.code(), Some(0));
        assert!(String::from_utf8_lossy(&out.stderr).contains("normalizing"));
        fs::read_to_string(log).unwrap()
    };
    assert_eq!(run("a.jsonl"), run("b.jsonl"));
}
