//! Flakiness classification from rerun outcome logs.
//!
//! Each test is looked at cell by cell, where a cell is one configuration
//! (os, node, optional browser) and holds the outcomes of all its reruns.
//! Failing outcomes (`fail`, `error`) are compared as one class.
//!
//! * **flaky**: some configuration has differing outcomes across reruns.
//! * **stable**: every cell has the same outcome.
//! * **env_dependent**: each cell is consistent but cells differ. The
//!   dimensions reported are the smallest set of dimensions whose values
//!   fully determine the outcome. When several distinct sets of that size
//!   work (dimensions confounded by an incomplete grid) the first in
//!   OS, Node, Browser order is reported and the result is flagged
//!   `unresolved`.
//!
//! The test id `__project__` carries the build/install outcome of the
//! whole project and drives the project-level `EnvFlakyProject` label.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::environment::{normalize_browser, normalize_os, Browser, Os};
use crate::version::{parse_version, Version};

pub const PROJECT_TEST_ID: &str = "__project__";

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("outcome log is empty")]
    EmptyLog,
    #[error("duplicate record for test `{test_id}` in {config} run {run_index}")]
    DuplicateRecord {
        test_id: String,
        config: ConfigKey,
        run_index: u32,
    },
    #[error("record {index}: {message}")]
    InvalidRecord { index: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Skip,
    Error,
}

impl Outcome {
    fn is_failure(self) -> bool {
        matches!(self, Outcome::Fail | Outcome::Error)
    }

    fn class(self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail | Outcome::Error => 1,
            Outcome::Skip => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConfigKey {
    pub os: Os,
    pub node: Version,
    pub browser: Option<Browser>,
}

impl fmt::Display for ConfigKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, node {}", self.os, self.node)?;
        if let Some(b) = self.browser {
            write!(f, ", {b}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeRecord {
    pub config: ConfigKey,
    /// 1-based.
    pub run_index: u32,
    pub test_id: String,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EnvDimension {
    #[serde(rename = "OSD")]
    Os,
    #[serde(rename = "NoD")]
    Node,
    #[serde(rename = "BrD")]
    Browser,
}

impl EnvDimension {
    const ALL: [EnvDimension; 3] = [EnvDimension::Os, EnvDimension::Node, EnvDimension::Browser];

    pub fn label(self) -> &'static str {
        match self {
            EnvDimension::Os => "OSD",
            EnvDimension::Node => "NoD",
            EnvDimension::Browser => "BrD",
        }
    }

    fn differs(self, a: &ConfigKey, b: &ConfigKey) -> bool {
        match self {
            EnvDimension::Os => a.os != b.os,
            EnvDimension::Node => a.node != b.node,
            EnvDimension::Browser => a.browser != b.browser,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestCategory {
    Stable,
    EnvDependent,
    Flaky,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestClassification {
    pub category: TestCategory,
    /// Empty unless `category` is `EnvDependent`.
    pub dimensions: BTreeSet<EnvDimension>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub unresolved: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ProjectCategory {
    NonFlakyProject,
    EnvFlakyProject,
    EnvFlakyTests,
    FlakyProject,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub tests: usize,
    pub configs: usize,
    pub max_run: u32,
    pub expected_cells: usize,
    pub observed_cells: usize,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlakinessClassification {
    pub per_test: BTreeMap<String, TestClassification>,
    pub per_project: BTreeSet<ProjectCategory>,
    /// Classification of the `__project__` signal, when present.
    pub project_signal: Option<TestClassification>,
    pub coverage: Coverage,
    pub diagnostics: Vec<String>,
}

pub fn classify_outcomes(records: &[OutcomeRecord]) -> Result<FlakinessClassification, ClassifyError> {
    if records.is_empty() {
        return Err(ClassifyError::EmptyLog);
    }
    // test -> config -> run -> outcome
    let mut grid: BTreeMap<&str, BTreeMap<ConfigKey, BTreeMap<u32, Outcome>>> = BTreeMap::new();
    for r in records {
        let runs = grid.entry(&r.test_id).or_default().entry(r.config).or_default();
        if runs.insert(r.run_index, r.outcome).is_some() {
            return Err(ClassifyError::DuplicateRecord {
                test_id: r.test_id.clone(),
                config: r.config,
                run_index: r.run_index,
            });
        }
    }

    let mut diagnostics = Vec::new();
    let mut per_test = BTreeMap::new();
    let mut project_signal = None;
    for (test_id, cells) in &grid {
        let classification = classify_test(cells);
        if classification.unresolved {
            diagnostics.push(format!(
                "{test_id}: outcome is determined by more than one minimal dimension set; reporting {}",
                labels(&classification.dimensions)
            ));
        }
        if *test_id == PROJECT_TEST_ID {
            project_signal = Some(classification);
        } else {
            per_test.insert(test_id.to_string(), classification);
        }
    }

    let mut per_project = BTreeSet::new();
    if !records.iter().any(|r| r.outcome.is_failure()) {
        per_project.insert(ProjectCategory::NonFlakyProject);
    }
    let has = |c: TestCategory| per_test.values().any(|t: &TestClassification| t.category == c);
    if has(TestCategory::EnvDependent) {
        per_project.insert(ProjectCategory::EnvFlakyTests);
    }
    if has(TestCategory::Flaky) {
        per_project.insert(ProjectCategory::FlakyProject);
    }
    match project_signal.as_ref().map(|p| p.category) {
        Some(TestCategory::EnvDependent) => {
            per_project.insert(ProjectCategory::EnvFlakyProject);
        }
        Some(TestCategory::Flaky) => {
            per_project.insert(ProjectCategory::FlakyProject);
        }
        _ => {}
    }

    let coverage = coverage(records, grid.len());
    if coverage.observed_cells < coverage.expected_cells {
        diagnostics.push(format!(
            "incomplete grid: {} of {} cells observed ({:.1}%)",
            coverage.observed_cells,
            coverage.expected_cells,
            coverage.ratio * 100.0
        ));
    }

    Ok(FlakinessClassification {
        per_test,
        per_project,
        project_signal,
        coverage,
        diagnostics,
    })
}

fn labels(dims: &BTreeSet<EnvDimension>) -> String {
    let v: Vec<&str> = dims.iter().map(|d| d.label()).collect();
    format!("{{{}}}", v.join(", "))
}

fn coverage(records: &[OutcomeRecord], tests: usize) -> Coverage {
    let oses: BTreeSet<_> = records.iter().map(|r| r.config.os).collect();
    let nodes: BTreeSet<_> = records.iter().map(|r| r.config.node).collect();
    let browsers: BTreeSet<_> = records.iter().map(|r| r.config.browser).collect();
    let max_run = records.iter().map(|r| r.run_index).max().unwrap_or(0);
    let configs = oses.len() * nodes.len() * browsers.len();
    let expected_cells = tests * configs * max_run as usize;
    let observed_cells = records.len();
    Coverage {
        tests,
        configs,
        max_run,
        expected_cells,
        observed_cells,
        ratio: if expected_cells == 0 {
            1.0
        } else {
            observed_cells as f64 / expected_cells as f64
        },
    }
}

fn classify_test(cells: &BTreeMap<ConfigKey, BTreeMap<u32, Outcome>>) -> TestClassification {
    let mut per_config: Vec<(ConfigKey, u8)> = Vec::with_capacity(cells.len());
    for (config, runs) in cells {
        let mut classes = runs.values().map(|o| o.class());
        let first = classes.next().expect("cell has at least one run");
        if classes.any(|c| c != first) {
            return TestClassification {
                category: TestCategory::Flaky,
                dimensions: BTreeSet::new(),
                unresolved: false,
            };
        }
        per_config.push((*config, first));
    }
    if per_config.iter().all(|(_, c)| *c == per_config[0].1) {
        return TestClassification {
            category: TestCategory::Stable,
            dimensions: BTreeSet::new(),
            unresolved: false,
        };
    }

    let varying: Vec<EnvDimension> = EnvDimension::ALL
        .into_iter()
        .filter(|d| per_config.iter().any(|(c, _)| d.differs(c, &per_config[0].0)))
        .collect();
    for size in 1..=varying.len() {
        let found: Vec<BTreeSet<EnvDimension>> = subsets(&varying, size)
            .into_iter()
            .filter(|subset| determines(&per_config, subset))
            .collect();
        if let Some(first) = found.first() {
            return TestClassification {
                category: TestCategory::EnvDependent,
                dimensions: first.clone(),
                unresolved: found.len() > 1,
            };
        }
    }
    // Distinct configurations differ in some varying dimension, so the full
    // varying set always determines the outcome.
    unreachable!("full dimension set determines outcome")
}

fn subsets(dims: &[EnvDimension], size: usize) -> Vec<BTreeSet<EnvDimension>> {
    (0u32..1 << dims.len())
        .filter(|mask| mask.count_ones() as usize == size)
        .map(|mask| {
            dims.iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, d)| *d)
                .collect()
        })
        .collect()
}

type Projection = (Option<Os>, Option<Version>, Option<Option<Browser>>);

/// Whether the projection onto `dims` fixes the outcome class.
fn determines(per_config: &[(ConfigKey, u8)], dims: &BTreeSet<EnvDimension>) -> bool {
    let mut seen: HashMap<Projection, u8> = HashMap::new();
    for (config, class) in per_config {
        let key = (
            dims.contains(&EnvDimension::Os).then_some(config.os),
            dims.contains(&EnvDimension::Node).then_some(config.node),
            dims.contains(&EnvDimension::Browser).then_some(config.browser),
        );
        if *seen.entry(key).or_insert(*class) != *class {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LogFormat {
    /// One json object per line.
    Ndjson,
    /// Header `os,node,browser,run,test,outcome`.
    Csv,
}

#[derive(Deserialize)]
struct JsonRecord {
    os: String,
    node: serde_json::Value,
    #[serde(default)]
    browser: Option<String>,
    run: u32,
    test: String,
    outcome: Outcome,
}

#[derive(Deserialize)]
struct CsvRecord {
    os: String,
    node: String,
    #[serde(default)]
    browser: Option<String>,
    run: u32,
    test: String,
    outcome: Outcome,
}

fn make_record(
    index: usize,
    os: &str,
    node: &str,
    browser: Option<&str>,
    run: u32,
    test: String,
    outcome: Outcome,
) -> Result<OutcomeRecord, ClassifyError> {
    let invalid = |message: String| ClassifyError::InvalidRecord { index, message };
    if run == 0 {
        return Err(invalid("run index must be at least 1".into()));
    }
    let os = normalize_os(os).map_err(|e| invalid(e.to_string()))?;
    let node = parse_version(node.trim()).map_err(|e| invalid(e.to_string()))?;
    let browser = match browser.map(str::trim).filter(|b| !b.is_empty()) {
        Some(b) => Some(normalize_browser(b).map_err(|e| invalid(e.to_string()))?),
        None => None,
    };
    Ok(OutcomeRecord {
        config: ConfigKey { os, node, browser },
        run_index: run,
        test_id: test,
        outcome,
    })
}

/// Parses an outcome log. Record indices in errors are 1-based lines for
/// ndjson and 1-based data rows for csv.
pub fn parse_outcome_log(text: &str, format: LogFormat) -> Result<Vec<OutcomeRecord>, ClassifyError> {
    let mut out = Vec::new();
    match format {
        LogFormat::Ndjson => {
            for (i, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let index = i + 1;
                let raw: JsonRecord = serde_json::from_str(line).map_err(|e| ClassifyError::InvalidRecord {
                    index,
                    message: e.to_string(),
                })?;
                let node = match &raw.node {
                    serde_json::Value::String(s) => s.clone(),
                    serde_json::Value::Number(n) if n.is_u64() => n.to_string(),
                    other => {
                        return Err(ClassifyError::InvalidRecord {
                            index,
                            message: format!("node must be a string or integer, got {other}"),
                        })
                    }
                };
                out.push(make_record(
                    index,
                    &raw.os,
                    &node,
                    raw.browser.as_deref(),
                    raw.run,
                    raw.test,
                    raw.outcome,
                )?);
            }
        }
        LogFormat::Csv => {
            let mut reader = csv::ReaderBuilder::new()
                .trim(csv::Trim::All)
                .from_reader(text.as_bytes());
            for (i, row) in reader.deserialize::<CsvRecord>().enumerate() {
                let index = i + 1;
                let raw = row.map_err(|e| ClassifyError::InvalidRecord {
                    index,
                    message: e.to_string(),
                })?;
                out.push(make_record(
                    index,
                    &raw.os,
                    &raw.node,
                    raw.browser.as_deref(),
                    raw.run,
                    raw.test,
                    raw.outcome,
                )?);
            }
        }
    }
    Ok(out)
}
