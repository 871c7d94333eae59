#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

pub const SCHEMAS: [&str; 6] = [
    "config",
    "key_rate_report",
    "observed_statistics",
    "sweep",
    "manifest",
    "attack_analysis",
];

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the `pingpong` binary with a clean config environment.
pub fn pingpong(args: &[&str]) -> Output {
    pingpong_env(args, None)
}

pub fn pingpong_env(args: &[&str], config: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pingpong"));
    cmd.args(args).env_remove("PINGPONG_CONFIG");
    if let Some(c) = config {
        cmd.env("PINGPONG_CONFIG", c);
    }
    let out = cmd.output().expect("binary runs");
    Output {
        code: out.status.code().expect("exited"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

pub fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

fn load(name: &str) -> Value {
    let path = schema_dir().join(format!("{name}.schema.json"));
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

/// Validates `doc` against the named schema; cross-schema references resolve
/// to the other files in the schema directory.
pub fn schema_errors(name: &str, doc: &Value) -> Vec<String> {
    let mut opts = jsonschema::options();
    for other in SCHEMAS {
        let s = load(other);
        let id = s["$id"].as_str().unwrap().to_string();
        opts = opts.with_resource(id, jsonschema::Resource::from_contents(s).unwrap());
    }
    let validator = opts.build(&load(name)).expect("schema compiles");
    validator
        .iter_errors(doc)
        .map(|e| format!("{}: {e}", e.instance_path))
        .collect()
}

pub fn assert_valid(name: &str, doc: &Value) {
    let errors = schema_errors(name, doc);
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

pub fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn write_config(dir: &Path, doc: &Value) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(doc).unwrap()).unwrap();
    path
}
