//! Helpers for driving the `avcdos` binary from tests.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;

use serde_json::Value;

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("{e}: {}", self.stdout))
    }
}

pub fn avcdos(args: &[&str]) -> Output {
    avcdos_env(args, &[])
}

pub fn avcdos_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_avcdos"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Output {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// Path (as a string) of a file under `data/`.
pub fn data(rel: &str) -> String {
    repo_root().join("data").join(rel).display().to_string()
}

pub fn schema_errors(v: &Value) -> Vec<String> {
    static VALIDATOR: OnceLock<jsonschema::Validator> = OnceLock::new();
    let validator = VALIDATOR.get_or_init(|| {
        let text = std::fs::read_to_string(repo_root().join("docs/report.schema.json")).unwrap();
        jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).expect("schema compiles")
    });
    validator
        .iter_errors(v)
        .map(|e| format!("{} at {}", e, e.instance_path()))
        .collect()
}

/// Writes `text` to `dir/name` and returns the path as a string.
pub fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

/// Runs `--verify` on a saved report and returns the verification object.
pub fn verify(dir: &Path, report: &Value) -> Value {
    let path = write(dir, "report.json", &report.to_string());
    let out = avcdos(&["analyze", "--verify", &path]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v = out.json();
    assert!(schema_errors(&v).is_empty(), "{:?}", schema_errors(&v));
    v["verification"].clone()
}
