use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_moduli-census"));
    c.env_remove("MODULI_CENSUS_CACHE");
    c
}

fn run(cache: &Path, args: &[&str]) -> Output {
    bin().arg("--cache-dir").arg(cache).args(args).output().expect("spawn")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const FIXTURE: [&str; 4] = ["--q", "3", "--poly", "1,2,0,0,0,1"];

#[test]
fn curve_reports_counts_and_l_polynomial() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &[&["curve"], &FIXTURE[..]].concat());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let v = stdout_json(&out);
    assert_eq!(v["point_counts"][0], "7");
    assert_eq!(v["lpoly"], serde_json::json!(["1", "3", "7", "9", "9"]));
    assert_eq!(v["nj"], "29");
    assert_eq!(v["nj2"], "145");
    assert_eq!(v["zeta"]["2"]["exact"], "1045/432");
}

#[test]
fn moduli_count_of_the_fixture() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &[&["moduli"], &FIXTURE[..], &["--rank", "2", "--deg", "1"]].concat());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout_json(&out)["count"], "49");
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    // x^2 (x^3 + 2x + 1) has a repeated root.
    let sq = run(dir.path(), &["curve", "--q", "3", "--poly", "0,0,1,2,0,1"]);
    assert_eq!(sq.status.code(), Some(2));
    assert!(stderr(&sq).contains("squarefree"));
    let even = run(dir.path(), &[&["moduli"], &FIXTURE[..], &["--rank", "2", "--deg", "2"]].concat());
    assert_eq!(even.status.code(), Some(3));
    let char2 = run(dir.path(), &["curve", "--q", "4", "--poly", "1,2,0,0,0,1"]);
    assert_eq!(char2.status.code(), Some(2));
    let huge = run(dir.path(), &["survey", "--q", "31", "--gamma", "5", "--exhaustive", "--out", dir.path().join("s").to_str().unwrap()]);
    assert_eq!(huge.status.code(), Some(4));
    let garbage = run(dir.path(), &["curve", "--q", "3"]);
    assert_eq!(garbage.status.code(), Some(2));
}

#[test]
fn second_run_is_served_from_the_cache() {
    let dir = TempDir::new().unwrap();
    let args = [&["-v", "curve"], &FIXTURE[..]].concat();
    let first = run(dir.path(), &args);
    assert!(stderr(&first).contains("point counts performed: 2"), "{}", stderr(&first));
    let second = run(dir.path(), &args);
    assert!(stderr(&second).contains("point counts performed: 0"), "{}", stderr(&second));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn environment_variable_overrides_cache_dir() {
    let flag = TempDir::new().unwrap();
    let env = TempDir::new().unwrap();
    let out = bin()
        .env("MODULI_CENSUS_CACHE", env.path())
        .arg("--cache-dir")
        .arg(flag.path())
        .args(["curve"])
        .args(FIXTURE)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(env.path().join("lpoly-v1.jsonl").exists());
    assert!(!flag.path().join("lpoly-v1.jsonl").exists());
}

#[test]
fn corrupted_cache_lines_are_dropped_and_healed() {
    let dir = TempDir::new().unwrap();
    let args = [&["-v", "curve"], &FIXTURE[..]].concat();
    run(dir.path(), &args);
    let file = dir.path().join("lpoly-v1.jsonl");
    let clean = fs::read_to_string(&file).unwrap();
    fs::write(&file, clean.replace("\"9\",\"9\"]", "\"9\",\"8\"]")).unwrap();
    let out = run(dir.path(), &args);
    assert_eq!(out.status.code(), Some(0));
    let err = stderr(&out);
    assert!(err.contains("dropped"), "{err}");
    assert!(err.contains("point counts performed: 2"), "{err}");
    assert_eq!(stdout_json(&out)["lpoly"][4], "9");
    assert_eq!(fs::read_to_string(&file).unwrap(), clean);
    let again = run(dir.path(), &args);
    assert!(!stderr(&again).contains("dropped"));
}

#[test]
fn exhaustive_survey_files() {
    let dir = TempDir::new().unwrap();
    let prefix = dir.path().join("s");
    let out = run(dir.path(), &["survey", "--q", "3", "--gamma", "5", "--exhaustive", "--Z", "4", "--out", prefix.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let jsonl = fs::read_to_string(dir.path().join("s.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), 162);
    for line in jsonl.lines() {
        let _: Value = serde_json::from_str(line).unwrap();
    }
    let csv = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(csv.starts_with("statistic,r,empirical,theoretical,tail,tolerance,pass\r\n"));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("s.report.json")).unwrap()).unwrap();
    assert!(report.is_object());
    assert!(dir.path().join("s.config.json").exists());
}

#[test]
fn survey_output_does_not_depend_on_thread_count() {
    let dir = TempDir::new().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "8"] {
        let prefix = dir.path().join(format!("t{threads}"));
        let out = run(
            dir.path(),
            &[
                "--threads", threads, "survey", "--q", "5", "--gamma", "6", "--samples", "200", "--Z", "3", "--rank", "3",
                "--deg", "1", "--stats", "ntilde", "--out", prefix.to_str().unwrap(),
            ],
        );
        assert!(matches!(out.status.code(), Some(0) | Some(1)), "{}", stderr(&out));
        let read = |ext: &str| fs::read(dir.path().join(format!("t{threads}.{ext}"))).unwrap();
        outputs.push((read("jsonl"), read("csv"), read("report.json")));
    }
    assert!(outputs[0] == outputs[1]);
}

#[test]
fn theory_tails_are_small() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("h.json");
    let out = run(dir.path(), &["theory", "hr", "--q", "5", "--r", "2", "--out", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&fs::read_to_string(&file).unwrap()).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert!(row["tail"].as_f64().unwrap() < 1e-6);
    }
    let a = rows[0]["value"].as_f64().unwrap();
    let b = rows[1]["value"].as_f64().unwrap();
    assert!((a - b).abs() <= rows[0]["tail"].as_f64().unwrap() + rows[1]["tail"].as_f64().unwrap());
}

#[test]
fn single_extension_beta1_breaks_route_agreement() {
    let dir = TempDir::new().unwrap();
    let full = run(dir.path(), &[&["stable20"], &FIXTURE[..]].concat());
    assert_eq!(full.status.code(), Some(0), "{}", stderr(&full));
    let v = stdout_json(&full);
    assert_eq!(v["count"], "23");
    assert_eq!(v["routes"]["assembly"], v["routes"]["closed_form"]);

    let single = run(dir.path(), &[&["--beta1-variant", "single-extension", "stable20"], &FIXTURE[..]].concat());
    assert_eq!(single.status.code(), Some(5));
    let v = stdout_json(&single);
    assert!(v["count"].is_null());
    assert_ne!(v["routes"]["assembly"], v["routes"]["closed_form"]);
    assert!(stderr(&single).contains("routes disagree"));
}

#[test]
fn check_passes() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), &["check"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}
