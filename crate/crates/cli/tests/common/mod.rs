#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn lambdap(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_lambdap"))
        .args(args)
        .output()
        .expect("spawn lambdap");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).expect("utf-8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("utf-8 stderr"),
    }
}

pub fn examples_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples")
}

pub fn example(name: &str) -> String {
    examples_dir()
        .join(format!("{name}.lp"))
        .display()
        .to_string()
}

/// Every example program, by name, in sorted order.
pub fn example_names() -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(examples_dir())
        .expect("examples dir")
        .filter_map(|e| {
            let path = e.ok()?.path();
            (path.extension()? == "lp").then(|| path.file_stem()?.to_str().map(String::from))?
        })
        .collect();
    names.sort();
    names
}

pub fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(format!("{name}.stdout"));
    std::fs::read_to_string(path).expect("golden file")
}

/// Writes `source` to a scratch file and returns its path.
pub fn scratch(tag: &str, source: &str) -> String {
    let dir = std::env::temp_dir().join(format!("lambdap-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("scratch dir");
    let path = dir.join(format!("{tag}.lp"));
    std::fs::write(&path, source).expect("write scratch file");
    path.display().to_string()
}
