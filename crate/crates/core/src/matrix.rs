//! Environment matrices: expansion, per-configuration skip prediction, and
//! a CI workflow template with the same strategy block.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::annotation::ParseMode;
use crate::diagnostic::{Diagnostic, Severity};
use crate::environment::{normalize_browser, normalize_os, Browser, Environment, EnvironmentError};
use crate::evaluator::{should_skip_with, Composition};
use crate::scanner::scan_source;
use crate::version::{parse_version, Version};

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error(transparent)]
    Environment(#[from] EnvironmentError),
    #[error("invalid matrix config: {0}")]
    InvalidConfig(String),
}

/// `{"os": [...], "node": [...], "browser": [...], "reruns": N}`. Node
/// entries may be json numbers or strings; `browser` may be omitted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixConfig {
    pub os: Vec<String>,
    #[serde(deserialize_with = "node_list")]
    pub node: Vec<String>,
    #[serde(default)]
    pub browser: Vec<String>,
    #[serde(default = "default_reruns")]
    pub reruns: u32,
}

fn default_reruns() -> u32 {
    1
}

fn node_list<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Vec<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Entry {
        Int(u64),
        Text(String),
    }
    let entries = Vec::<Entry>::deserialize(deserializer)?;
    Ok(entries
        .into_iter()
        .map(|e| match e {
            Entry::Int(n) => n.to_string(),
            Entry::Text(s) => s,
        })
        .collect())
}

impl Default for MatrixConfig {
    /// Three hosted runner images, Node.js 18/20/22, ten attempts each.
    fn default() -> Self {
        Self {
            os: vec!["ubuntu-latest".into(), "macos-latest".into(), "windows-latest".into()],
            node: vec!["18".into(), "20".into(), "22".into()],
            browser: Vec::new(),
            reruns: 10,
        }
    }
}

impl MatrixConfig {
    /// Number of environments, reruns not counted.
    pub fn size(&self) -> usize {
        self.os.len() * self.node.len() * self.browser.len().max(1)
    }

    fn validate(&self) -> Result<(), MatrixError> {
        if self.os.is_empty() {
            return Err(MatrixError::InvalidConfig("os list is empty".into()));
        }
        if self.node.is_empty() {
            return Err(MatrixError::InvalidConfig("node list is empty".into()));
        }
        if self.reruns == 0 {
            return Err(MatrixError::InvalidConfig("reruns must be at least 1".into()));
        }
        Ok(())
    }
}

/// Runner versions of the hosted images: each OS paired with Node.js
/// 18.20.8, 20.19.1 and 22.15.0 and one of its preinstalled browsers.
pub fn runner_image_environments() -> Vec<Environment> {
    use crate::environment::Os::*;
    let v = [
        Version::new(18, 20, 8),
        Version::new(20, 19, 1),
        Version::new(22, 15, 0),
    ];
    vec![
        Environment::new(Linux, v[0], Browser::Chrome),
        Environment::new(Linux, v[1], Browser::Edge),
        Environment::new(Linux, v[2], Browser::Firefox),
        Environment::new(Darwin, v[0], Browser::Chrome),
        Environment::new(Darwin, v[1], Browser::Safari),
        Environment::new(Darwin, v[2], Browser::Unknown),
        Environment::new(Win32, v[0], Browser::Chrome),
        Environment::new(Win32, v[1], Browser::Edge),
        Environment::new(Win32, v[2], Browser::Firefox),
    ]
}

/// Cartesian product in (os, node, browser) list order.
pub fn expand_matrix(config: &MatrixConfig) -> Result<Vec<Environment>, MatrixError> {
    config.validate()?;
    let oses = config
        .os
        .iter()
        .map(|s| normalize_os(s))
        .collect::<Result<Vec<_>, _>>()?;
    let nodes = config
        .node
        .iter()
        .map(|s| parse_version(s.trim()).map_err(EnvironmentError::from))
        .collect::<Result<Vec<_>, _>>()?;
    let browsers = if config.browser.is_empty() {
        vec![Browser::Unknown]
    } else {
        config
            .browser
            .iter()
            .map(|s| normalize_browser(s))
            .collect::<Result<Vec<_>, _>>()?
    };
    let mut out = Vec::with_capacity(config.size());
    for &os in &oses {
        for &node in &nodes {
            for &browser in &browsers {
                out.push(Environment::new(os, node, browser));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cell {
    Run,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixRow {
    pub file: PathBuf,
    pub line: usize,
    pub callee: String,
    pub test_name: Option<String>,
    /// One per environment, in `SkipMatrix::environments` order.
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipMatrix {
    pub environments: Vec<Environment>,
    pub rows: Vec<MatrixRow>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone)]
pub struct SourceFile {
    pub path: PathBuf,
    pub bytes: Vec<u8>,
}

/// Skip decision of every located test block under every environment.
pub fn predict_skip_matrix(
    files: &[SourceFile],
    config: &MatrixConfig,
    composition: Composition,
) -> Result<SkipMatrix, MatrixError> {
    let environments = expand_matrix(config)?;
    Ok(predict_for_environments(files, environments, composition))
}

pub fn predict_for_environments(
    files: &[SourceFile],
    environments: Vec<Environment>,
    composition: Composition,
) -> SkipMatrix {
    let mut rows = Vec::new();
    let mut diagnostics = Vec::new();
    for file in files {
        let text = match std::str::from_utf8(&file.bytes) {
            Ok(t) => t,
            Err(e) => {
                diagnostics.push(Diagnostic::new(
                    Severity::Error,
                    &file.path,
                    0,
                    format!("not valid UTF-8 (at byte {})", e.valid_up_to()),
                ));
                continue;
            }
        };
        let scanned = match scan_source(text, &file.path, ParseMode::Lenient) {
            Ok(s) => s,
            Err(e) => {
                diagnostics.push(Diagnostic::new(Severity::Error, &file.path, 0, e.to_string()));
                continue;
            }
        };
        diagnostics.extend(scanned.diagnostics);
        for block in &scanned.blocks {
            let annotations = block.docblock.as_ref().map(|d| d.annotations.as_slice()).unwrap_or(&[]);
            let cells = environments
                .iter()
                .map(|env| {
                    if should_skip_with(annotations, env, composition).skip {
                        Cell::Skip
                    } else {
                        Cell::Run
                    }
                })
                .collect();
            rows.push(MatrixRow {
                file: file.path.clone(),
                line: block.line,
                callee: block.callee.clone(),
                test_name: block.name.clone(),
                cells,
            });
        }
    }
    SkipMatrix {
        environments,
        rows,
        diagnostics,
    }
}

fn column_label(env: &Environment) -> String {
    let mut label = format!("{}@{}", env.os, env.node_version);
    if env.browser != Browser::Unknown {
        let _ = write!(label, "/{}", env.browser);
    }
    label
}

impl SkipMatrix {
    pub fn render_text(&self) -> String {
        let labels: Vec<String> = self.environments.iter().map(column_label).collect();
        let names: Vec<String> = self
            .rows
            .iter()
            .map(|r| {
                format!(
                    "{}:{} {} {}",
                    r.file.display(),
                    r.line,
                    r.callee,
                    r.test_name.as_deref().map(|n| format!("{n:?}")).unwrap_or_default()
                )
            })
            .collect();
        let first = names.iter().map(String::len).max().unwrap_or(0).max(4);
        let mut out = String::new();
        let _ = write!(out, "{:<first$}", "test");
        for l in &labels {
            let _ = write!(out, "  {l}");
        }
        out.push('\n');
        for (row, name) in self.rows.iter().zip(&names) {
            let _ = write!(out, "{name:<first$}");
            for (cell, l) in row.cells.iter().zip(&labels) {
                let mark = match cell {
                    Cell::Run => "run",
                    Cell::Skip => "SKIP",
                };
                let _ = write!(out, "  {mark:<w$}", w = l.len());
            }
            out.truncate(out.trim_end().len());
            out.push('\n');
        }
        out
    }
}

/// A workflow file whose strategy block is `fail-fast: false` with os,
/// node-version and attempt lists taken from `config`.
pub fn emit_workflow_template(config: &MatrixConfig) -> String {
    let list = |items: &[String]| items.join(", ");
    let attempts: Vec<String> = (1..=config.reruns.max(1)).map(|i| i.to_string()).collect();
    let mut y = String::new();
    y.push_str("name: environment-matrix\n");
    y.push_str("on: [push, pull_request]\n");
    y.push_str("jobs:\n");
    y.push_str("  test:\n");
    y.push_str("    runs-on: ${{ matrix.os }}\n");
    y.push_str("    strategy:\n");
    y.push_str("      fail-fast: false\n");
    y.push_str("      matrix:\n");
    let _ = writeln!(y, "        os: [{}]", list(&config.os));
    let _ = writeln!(y, "        node-version: [{}]", list(&config.node));
    if !config.browser.is_empty() {
        let _ = writeln!(y, "        browser: [{}]", list(&config.browser));
    }
    let _ = writeln!(y, "        attempt: [{}]", attempts.join(", "));
    y.push_str("    steps:\n");
    y.push_str("      - uses: actions/checkout@v4\n");
    y.push_str("      - uses: actions/setup-node@v4\n");
    y.push_str("        with:\n");
    y.push_str("          node-version: ${{ matrix.node-version }}\n");
    y.push_str("      - run: npm ci\n");
    y.push_str("      - run: npm test\n");
    if !config.browser.is_empty() {
        y.push_str("        env:\n");
        y.push_str("          ENVSAN_BROWSER: ${{ matrix.browser }}\n");
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::Os;

    fn config(os: &[&str], node: &[&str], browser: &[&str]) -> MatrixConfig {
        MatrixConfig {
            os: os.iter().map(|s| s.to_string()).collect(),
            node: node.iter().map(|s| s.to_string()).collect(),
            browser: browser.iter().map(|s| s.to_string()).collect(),
            reruns: 1,
        }
    }

    #[test]
    fn default_matrix_has_nine_configurations() {
        let envs = expand_matrix(&MatrixConfig::default()).unwrap();
        assert_eq!(envs.len(), 9);
        assert_eq!(
            envs[0],
            Environment::new(Os::Linux, Version::new(18, 0, 0), Browser::Unknown)
        );
        assert_eq!(
            envs[8],
            Environment::new(Os::Win32, Version::new(22, 0, 0), Browser::Unknown)
        );
    }

    #[test]
    fn singleton_and_ordering() {
        assert_eq!(expand_matrix(&config(&["linux"], &["20"], &[])).unwrap().len(), 1);
        let envs = expand_matrix(&config(&["linux", "win32"], &["18", "20"], &["chrome", "firefox"])).unwrap();
        // Enumeration oracle: nested loops in list order.
        let mut expected = Vec::new();
        for os in [Os::Linux, Os::Win32] {
            for major in [18, 20] {
                for b in [Browser::Chrome, Browser::Firefox] {
                    expected.push(Environment::new(os, Version::new(major, 0, 0), b));
                }
            }
        }
        assert_eq!(envs, expected);
    }

    #[test]
    fn invalid_configs() {
        assert!(matches!(
            expand_matrix(&config(&["linux"], &["eighteen"], &[])),
            Err(MatrixError::Environment(EnvironmentError::InvalidVersion(_)))
        ));
        assert!(matches!(
            expand_matrix(&config(&[], &["18"], &[])),
            Err(MatrixError::InvalidConfig(_))
        ));
        let mut c = config(&["linux"], &["18"], &[]);
        c.reruns = 0;
        assert!(matches!(expand_matrix(&c), Err(MatrixError::InvalidConfig(_))));
    }

    #[test]
    fn config_json_accepts_numbers() {
        let c: MatrixConfig =
            serde_json::from_str(r#"{"os":["ubuntu-latest"],"node":[18,"20.19.1"],"reruns":3}"#).unwrap();
        assert_eq!(c.node, ["18", "20.19.1"]);
        assert!(c.browser.is_empty());
        assert_eq!(c.reruns, 3);
    }

    #[test]
    fn workflow_lists() {
        let y = emit_workflow_template(&MatrixConfig::default());
        assert!(y.contains("      fail-fast: false\n"));
        assert!(y.contains("os: [ubuntu-latest, macos-latest, windows-latest]\n"));
        assert!(y.contains("node-version: [18, 20, 22]\n"));
        assert!(y.contains("attempt: [1, 2, 3, 4, 5, 6, 7, 8, 9, 10]\n"));
        assert!(!y.contains("browser"));

        let mut c = MatrixConfig {
            reruns: 1,
            ..Default::default()
        };
        assert!(emit_workflow_template(&c).contains("attempt: [1]\n"));
        c.browser = vec!["chrome".into()];
        assert!(emit_workflow_template(&c).contains("ENVSAN_BROWSER"));
    }

    #[test]
    fn prediction_unannotated_is_all_run() {
        let files = [SourceFile {
            path: "a.test.js".into(),
            bytes: b"it('a', f)\ntest('b', f)\n".to_vec(),
        }];
        let m = predict_skip_matrix(&files, &MatrixConfig::default(), Composition::Disjunctive).unwrap();
        assert_eq!(m.rows.len(), 2);
        assert!(m.rows.iter().all(|r| r.cells.iter().all(|c| *c == Cell::Run)));
        assert!(m.render_text().lines().count() == 3);
    }

    #[test]
    fn runner_images() {
        let envs = runner_image_environments();
        assert_eq!(envs.len(), 9);
        assert_eq!(envs.iter().filter(|e| e.os == Os::Win32).count(), 3);
    }
}
