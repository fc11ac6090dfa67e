//! Helpers for driving the built binary against bundled scenarios.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn scenario_dir() -> PathBuf {
    manifest_dir().join("scenarios")
}

pub fn golden_dir() -> PathBuf {
    manifest_dir().join("tests").join("golden")
}

/// Bundled scenarios with their declared task, sorted by file name.
pub fn bundled() -> Vec<(PathBuf, String)> {
    let mut out: Vec<(PathBuf, String)> = std::fs::read_dir(scenario_dir())
        .expect("scenario directory")
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .map(|p| {
            let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&p).unwrap()).unwrap();
            let task = v["task"].as_str().expect("task field").to_string();
            (p, task)
        })
        .collect();
    out.sort();
    out
}

pub fn stem(path: &Path) -> String {
    path.file_stem().unwrap().to_string_lossy().into_owned()
}

/// Exit status each bundled scenario is expected to produce.
pub fn expected_exit(stem: &str) -> i32 {
    match stem {
        "cto_cycle" => 4,
        _ => 0,
    }
}

pub fn revtherm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_revtherm")).args(args).output().expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

/// Runs a scenario with CSV output into `csv_dir`; returns (exit, report).
pub fn run_scenario(path: &Path, task: &str, csv_dir: &Path, extra: &[&str]) -> (i32, String) {
    let mut args = vec![task, "--scenario", path.to_str().unwrap(), "--csv-dir", csv_dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = revtherm(&args);
    (code(&out), String::from_utf8(out.stdout).expect("utf-8 report"))
}

pub fn report_json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).expect("report is JSON")
}

/// Parsed CSV side file: header plus numeric rows.
pub fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).expect("csv opens");
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(|c| c.parse().unwrap()).collect()).collect();
    (header, rows)
}

/// Compares every bundled report and side file against the golden copies.
/// With `REVTHERM_UPDATE_GOLDEN` set, rewrites them instead.
pub fn check_goldens() -> Vec<String> {
    let update = std::env::var_os("REVTHERM_UPDATE_GOLDEN").is_some();
    let mut problems = Vec::new();
    for (path, task) in bundled() {
        let name = stem(&path);
        let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
        let (code_a, report_a) = run_scenario(&path, &task, dirs[0].path(), &[]);
        let (code_b, report_b) = run_scenario(&path, &task, dirs[1].path(), &[]);
        if code_a != expected_exit(&name) {
            problems.push(format!("{name}: exit {code_a}"));
        }
        if code_a != code_b || report_a != report_b {
            problems.push(format!("{name}: output differs between runs"));
        }
        let mut files = vec![(format!("{name}.report.json"), report_a.into_bytes())];
        let mut side: Vec<PathBuf> = std::fs::read_dir(dirs[0].path()).unwrap().map(|e| e.unwrap().path()).collect();
        side.sort();
        for f in side {
            let bytes = std::fs::read(&f).unwrap();
            let file_name = f.file_name().unwrap().to_string_lossy().into_owned();
            if std::fs::read(dirs[1].path().join(&file_name)).ok().as_ref() != Some(&bytes) {
                problems.push(format!("{file_name}: side file differs between runs"));
            }
            files.push((file_name, bytes));
        }
        for (file_name, bytes) in files {
            let golden = golden_dir().join(&file_name);
            if update {
                std::fs::write(&golden, &bytes).unwrap();
            } else if std::fs::read(&golden).ok().as_ref() != Some(&bytes) {
                problems.push(format!("{file_name}: differs from golden copy"));
            }
        }
    }
    problems
}
