use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dpcc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpcc")).args(args).output().expect("binary runs")
}

fn read_json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join(format!("{name}.json"))).unwrap()).unwrap()
}

const LINE: &[&str] = &["learn-line", "--p", "5", "--eps", "0.4", "--scale-range", "3", "--scale-ell", "40"];

#[test]
fn every_subcommand_exists() {
    for c in [
        "dims", "ldim", "cc", "repdim", "cover", "learn-line", "learn-dist", "learn-label", "audit", "stability", "report",
    ] {
        assert_eq!(dpcc(&[c, "--help"]).status.code(), Some(0), "{c}");
    }
}

#[test]
fn same_seed_same_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let mut args = vec!["--seed", "9", "--out", dir.path().to_str().unwrap()];
        args.extend_from_slice(LINE);
        assert_eq!(dpcc(&args).status.code(), Some(0));
    }
    for ext in ["json", "csv"] {
        let f = format!("learn-line.{ext}");
        assert_eq!(fs::read(a.path().join(&f)).unwrap(), fs::read(b.path().join(&f)).unwrap());
    }
    let j = read_json(a.path(), "learn-line");
    assert_eq!(j["seed"], 9);
    let flags = j["deviation_flags"].as_array().unwrap();
    assert!(flags.iter().all(|f| f.as_str().unwrap().starts_with("non-paper-constants")));
    assert_eq!(flags.len(), 2);
}

#[test]
fn config_overrides_flags_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"b": 3, "class": "point", "seed": 17}"#).unwrap();
    let out = dpcc(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "dims",
        "--class",
        "thr",
        "--b",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let j = read_json(dir.path(), "dims");
    assert_eq!(j["config"]["b"], 3);
    assert_eq!(j["config"]["class"], "point");
    assert_eq!(j["seed"], 17);
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.contains("point(b=3),8,8,1,1"), "{csv}");
}

#[test]
fn exit_codes() {
    assert_eq!(dpcc(&["dims", "--class", "nope"]).status.code(), Some(2));
    assert_eq!(dpcc(&["learn-line", "--p", "4"]).status.code(), Some(2));
    let cap = dpcc(&["dims", "--class", "hs", "--b", "8", "--d", "6"]);
    assert_eq!(cap.status.code(), Some(3));
    assert!(String::from_utf8(cap.stderr).unwrap().contains("cap_exceeded"));
    // Flipping with probability 0.2 has ratio 4 > e.
    assert_eq!(dpcc(&["audit", "--mech", "rr", "--flip", "0.2", "--alpha", "1"]).status.code(), Some(1));
    assert_eq!(dpcc(&["audit", "--mech", "rr", "--flip", "0.2", "--alpha", "1.5"]).status.code(), Some(0));
}
