//! Classifies a rerun log into stable, environment-dependent and flaky
//! tests.
//!
//! `cargo run --example classify_outcomes`

use envsan::classify::{parse_outcome_log, LogFormat};
use envsan::classify_outcomes;

fn main() {
    let mut csv = String::from("os,node,browser,run,test,outcome\n");
    for os in ["linux", "darwin", "win32"] {
        for node in ["18.20.8", "20.19.1", "22.15.0"] {
            for run in 1..=10 {
                let windows_old_node = os == "win32" && !node.starts_with("22");
                let rows = [
                    ("math > adds", "pass"),
                    ("fs > symlinks", if os == "win32" { "fail" } else { "pass" }),
                    ("fetch > streams", if node.starts_with("18") { "error" } else { "pass" }),
                    ("cli > spawns", if windows_old_node { "fail" } else { "pass" }),
                    (
                        "timer > debounce",
                        if run == 4 && os == "darwin" { "fail" } else { "pass" },
                    ),
                ];
                for (test, outcome) in rows {
                    csv.push_str(&format!("{os},{node},,{run},{test},{outcome}\n"));
                }
            }
        }
    }

    let records = parse_outcome_log(&csv, LogFormat::Csv).unwrap();
    let c = classify_outcomes(&records).unwrap();
    for (test, t) in &c.per_test {
        let dims: Vec<&str> = t.dimensions.iter().map(|d| d.label()).collect();
        println!("{test:<18} {:?} {dims:?}", t.category);
    }
    println!("project: {:?}", c.per_project);
    println!(
        "coverage: {}/{} cells",
        c.coverage.observed_cells, c.coverage.expected_cells
    );
}
