//! Predicts run/skip for every test over a CI matrix.
//!
//! `cargo run --example predict_matrix`

use envsan::matrix::{predict_for_environments, runner_image_environments, SourceFile};
use envsan::{predict_skip_matrix, Composition, MatrixConfig};

const SOURCE: &str = "/**\n * @skipOnNodeVersion 20,22\n */\nit('provider', () => {});\n\n/**\n * @skipOnOS win32\n */\nit('snippet ids', () => {});\n\n/** @enableOnBrowser chrome, firefox */\nit('clipboard', () => {});\n";

fn main() {
    let files = [SourceFile {
        path: "snippets.test.js".into(),
        bytes: SOURCE.as_bytes().to_vec(),
    }];

    let config: MatrixConfig =
        serde_json::from_str(r#"{"os": ["ubuntu-latest", "windows-latest"], "node": [18, "22"]}"#).unwrap();
    let m = predict_skip_matrix(&files, &config, Composition::Disjunctive).unwrap();
    print!("{}", m.render_text());
    println!();

    let m = predict_for_environments(&files, runner_image_environments(), Composition::Disjunctive);
    print!("{}", m.render_text());
}
