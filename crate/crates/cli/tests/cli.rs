use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn multisol(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multisol"))
        .current_dir(dir)
        .env_remove("MULTISOL_OUT_DIR")
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = multisol(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn pipeline(dir: &Path, jobs: &str) {
    ok(dir, &["--jobs", jobs, "gen", "--task", "dfs", "--n", "7", "--count", "6", "--seed", "4", "-o", "g.json"]);
    ok(dir, &["--jobs", jobs, "dist", "-i", "g.json", "--seed", "5", "-o", "d.json"]);
    ok(
        dir,
        &[
            "--jobs",
            jobs,
            "sample",
            "-g",
            "g.json",
            "-d",
            "d.json",
            "--method",
            "alt-upwards",
            "--seed",
            "6",
            "-o",
            "s.json",
        ],
    );
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    pipeline(a.path(), "1");
    pipeline(b.path(), "8");
    for f in ["g.json", "d.json", "s.json"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
        assert!(a.path().join(format!("{f}.manifest.json")).exists());
    }
}

#[test]
fn every_output_has_a_replayable_manifest() {
    let dir = tempfile::tempdir().unwrap();
    pipeline(dir.path(), "2");
    let manifest: Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("s.json.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "sample");
    assert_eq!(manifest["seed"], 6);
    assert_eq!(manifest["config"]["method"], "alt-upwards");
    ok(dir.path(), &["replay", "s.json.manifest.json", "-o", "again.json"]);
    assert_eq!(
        std::fs::read(dir.path().join("s.json")).unwrap(),
        std::fs::read(dir.path().join("again.json")).unwrap()
    );
}

#[test]
fn argmax_samples_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["gen", "--task", "bf", "--n", "6", "--count", "3", "--seed", "1", "-o", "g.json"]);
    ok(dir.path(), &["dist", "-i", "g.json", "--seed", "2", "-o", "d.json"]);
    ok(
        dir.path(),
        &["sample", "-g", "g.json", "-d", "d.json", "--method", "argmax", "--k", "5", "--seed", "3", "-o", "s.json"],
    );
    let samples: Value = serde_json::from_slice(&std::fs::read(dir.path().join("s.json")).unwrap()).unwrap();
    for graph in samples.as_array().unwrap() {
        let solutions = graph["solutions"].as_array().unwrap();
        assert_eq!(solutions.len(), 5);
        assert!(solutions.iter().all(|s| s == &solutions[0] && s["valid"] == true));
    }
}

#[test]
fn check_reports_one_line_per_solution() {
    let dir = tempfile::tempdir().unwrap();
    pipeline(dir.path(), "1");
    let out = ok(dir.path(), &["check", "-g", "g.json", "-s", "s.json"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,valid,failed_tags"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 30);
    assert!(rows.iter().enumerate().all(|(i, r)| r.starts_with(&format!("{i},"))));
}

#[test]
fn studies_default_to_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_multisol"))
        .env("MULTISOL_OUT_DIR", dir.path())
        .args(["study", "table2", "--task", "bf", "--n", "5", "--graph-count", "4", "--runs", "2", "--seed", "1"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
    let table = std::fs::read_to_string(dir.path().join("table2-bf-n5.csv")).unwrap();
    assert!(table.starts_with("method,n,dist,acc_mean,acc_std\n"));
    assert_eq!(table.lines().count(), 5);
    assert!(dir.path().join("table2-bf-n5.csv.manifest.json").exists());
}

#[test]
fn missing_output_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = multisol(dir.path(), &["gen", "--task", "bf", "--n", "5", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn jobs_must_be_positive() {
    let dir = tempfile::tempdir().unwrap();
    let out = multisol(dir.path(), &["--jobs", "0", "gen", "--task", "bf", "--n", "5", "--seed", "1", "-o", "g.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn perturbed_studies_need_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let out = multisol(
        dir.path(),
        &["study", "table2", "--task", "bf", "--n", "5", "--dist", "perturbed", "--seed", "1", "-o", "t.csv"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--alpha"));
}

#[test]
fn zero_runs_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = multisol(
        dir.path(),
        &["study", "table2", "--task", "dfs", "--n", "5", "--runs", "0", "--seed", "1", "-o", "t.csv"],
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn beam_is_refused_for_dfs() {
    let dir = tempfile::tempdir().unwrap();
    pipeline(dir.path(), "1");
    let out = multisol(
        dir.path(),
        &["sample", "-g", "g.json", "-d", "d.json", "--method", "beam", "--seed", "1", "-o", "x.json"],
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_method_lists_the_choices() {
    let dir = tempfile::tempdir().unwrap();
    let out = multisol(
        dir.path(),
        &["sample", "-g", "g.json", "-d", "d.json", "--method", "viterbi", "--seed", "1", "-o", "x.json"],
    );
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    for m in ["argmax", "upwards", "alt-upwards", "beam", "greedy", "random"] {
        assert!(msg.contains(m), "{msg}");
    }
}

#[test]
fn unreadable_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = multisol(dir.path(), &["dist", "-i", "missing.json", "--seed", "1", "-o", "d.json"]);
    assert_eq!(out.status.code(), Some(4));
    std::fs::write(dir.path().join("bad.json"), "[{").unwrap();
    let out = multisol(dir.path(), &["dist", "-i", "bad.json", "--seed", "1", "-o", "d.json"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn mismatched_inputs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    pipeline(dir.path(), "1");
    ok(dir.path(), &["gen", "--task", "dfs", "--n", "7", "--count", "2", "--seed", "9", "-o", "few.json"]);
    let out = multisol(
        dir.path(),
        &["sample", "-g", "few.json", "-d", "d.json", "--method", "argmax", "--seed", "1", "-o", "x.json"],
    );
    assert_eq!(out.status.code(), Some(3));
    let out = multisol(
        dir.path(),
        &["study", "coverage", "--task", "dfs", "--n", "5", "--graphs", "g.json", "--seed", "1", "-o", "c.csv"],
    );
    assert_eq!(out.status.code(), Some(3));
}
