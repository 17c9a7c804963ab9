#![allow(dead_code)]

pub mod corpus;
pub mod oracle;

use lambdap::{compile, run_program, RunConfig};

/// Printed value or error message.
pub fn run(src: &str, cfg: &RunConfig) -> Result<String, String> {
    let e = compile(src, true).map_err(|e| format!("parse error: {e}"))?;
    run_program(&e, cfg)
        .value
        .map(|v| v.to_string())
        .map_err(|e| e.to_string())
}

pub fn run_seq(src: &str) -> Result<String, String> {
    run(src, &RunConfig::sequential())
}

pub fn run_par(src: &str, workers: usize) -> Result<String, String> {
    run(src, &RunConfig::default().with_workers(workers))
}

/// Printed value according to the substitution oracle.
pub fn run_oracle(src: &str) -> Result<String, String> {
    let e = compile(src, true).map_err(|e| format!("parse error: {e}"))?;
    oracle::eval(oracle::from_expr(&e)).map(|v| oracle::show(&v))
}
