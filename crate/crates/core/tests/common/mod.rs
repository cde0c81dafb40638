//! Golden-file runner for the command-line fixtures.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde::Deserialize;

#[derive(Deserialize)]
pub struct Case {
    pub name: String,
    pub args: Vec<String>,
    pub exit: i32,
    #[serde(default)]
    pub env: Vec<(String, String)>,
}

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/cli")
}

pub fn cases() -> Vec<Case> {
    let text = std::fs::read_to_string(fixture_dir().join("cases.json")).expect("cases.json");
    serde_json::from_str(&text).expect("cases.json parses")
}

/// Runs every case; returns one message per mismatch. With
/// `UPDATE_GOLDENS=1` the stdout goldens are rewritten instead.
pub fn run_goldens(binary: &str) -> (usize, Vec<String>) {
    let update = std::env::var("UPDATE_GOLDENS").is_ok_and(|v| v == "1");
    let mut failures = Vec::new();
    let all = cases();
    for case in &all {
        let out = Command::new(binary)
            .args(&case.args)
            .envs(case.env.iter().map(|(k, v)| (k.as_str(), v.as_str())))
            .current_dir(env!("CARGO_MANIFEST_DIR"))
            .output()
            .expect("binary runs");
        let stdout = String::from_utf8(out.stdout).expect("utf-8 output");
        let code = out.status.code().unwrap_or(-1);
        if code != case.exit {
            failures.push(format!("{}: exit {} (expected {})", case.name, code, case.exit));
        }
        let golden = fixture_dir().join(format!("{}.stdout", case.name));
        if update {
            std::fs::write(&golden, &stdout).expect("write golden");
            continue;
        }
        match std::fs::read_to_string(&golden) {
            Ok(expected) if expected == stdout => {}
            Ok(_) => failures.push(format!("{}: stdout differs from {}", case.name, golden.display())),
            Err(_) => failures.push(format!("{}: missing golden {}", case.name, golden.display())),
        }
    }
    (all.len(), failures)
}
