#![allow(dead_code)]

use std::fs;
use std::os::unix::fs::PermissionsExt;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use serde_json::Value;

pub fn core_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core")
}

fn report_schema() -> &'static jsonschema::Validator {
    static V: OnceLock<jsonschema::Validator> = OnceLock::new();
    V.get_or_init(|| {
        let text = fs::read_to_string(core_dir().join("schemas/report.schema.json")).unwrap();
        jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
    })
}

/// Parses a report, checks it against the schema and the score/total rules.
pub fn check_report(text: &str) -> Value {
    let doc: Value = serde_json::from_str(text).expect("report is JSON");
    let errors: Vec<String> = report_schema()
        .iter_errors(&doc)
        .map(|e| e.to_string())
        .collect();
    assert!(errors.is_empty(), "{errors:?}\n{text}");
    let score = ["BAD", "MODERATE", "GOOD", "EXCELLENT"]
        .iter()
        .position(|g| doc["quality"]["code"] == *g)
        .unwrap() as u64;
    assert_eq!(doc["quality"]["score"].as_u64(), Some(score));
    assert_eq!(
        doc["statistics"]["total"].as_u64(),
        Some(doc["issues"].as_array().unwrap().len() as u64)
    );
    doc
}

pub fn codegrade(args: &[&str]) -> Output {
    codegrade_with_env(args, &[])
}

pub fn codegrade_with_env(args: &[&str], env: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_codegrade"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// A `flake8` stand-in that prints `output` whatever it is asked.
pub fn stub_flake8(dir: &Path, output: &str) -> PathBuf {
    let data = dir.join("flake8.out");
    fs::write(&data, output).unwrap();
    let exe = dir.join("flake8");
    fs::write(&exe, format!("#!/bin/sh\ncat '{}'\n", data.display())).unwrap();
    fs::set_permissions(&exe, fs::Permissions::from_mode(0o755)).unwrap();
    exe
}

pub fn write(path: &Path, text: &str) {
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(path, text).unwrap();
}
