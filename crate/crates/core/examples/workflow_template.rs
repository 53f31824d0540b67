//! Emits a CI workflow that reruns the suite across the default matrix.
//!
//! `cargo run --example workflow_template`

use envsan::{emit_workflow_template, expand_matrix, MatrixConfig};

fn main() {
    let config = MatrixConfig::default();
    let envs = expand_matrix(&config).unwrap();
    eprintln!(
        "{} environments x {} attempts = {} jobs",
        envs.len(),
        config.reruns,
        config.size() * config.reruns as usize
    );
    print!("{}", emit_workflow_template(&config));
}
