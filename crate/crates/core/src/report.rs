//! Skip records and the report document.
//!
//! The json report is a single object with keys in this order:
//!
//! | key              | type                                                    |
//! |------------------|---------------------------------------------------------|
//! | `schema_version` | integer, currently `1`                                  |
//! | `tool_version`   | string                                                  |
//! | `environment`    | `{os, node_version, browser}`                           |
//! | `records`        | array of skip records, ordered by file then line        |
//! | `summary`        | counts recomputed from `records`                        |
//! | `scan`           | files scanned, files that failed, test blocks located, blocks that could not be rewritten |
//! | `diagnostics`    | array of `{severity, file, line, message}`              |
//!
//! A skip record holds `file`, `line`, `column`, `callee`, `test_name`
//! (string or null), `matched` (raw tag texts), `dimensions`,
//! `reason_summary`, `environment`, `timestamp` (RFC 3339, UTC) and
//! `already_skipped`.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::Dimension;
use crate::diagnostic::Diagnostic;
use crate::environment::Environment;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const DEFAULT_REPORT_PATH: &str = "envsan-report.json";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: unsupported schema version {found}")]
    Schema { path: PathBuf, found: u32 },
}

/// Source of record timestamps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Clock {
    #[default]
    System,
    Fixed(DateTime<Utc>),
}

impl Clock {
    pub fn now(&self) -> DateTime<Utc> {
        match self {
            Clock::System => Utc::now(),
            Clock::Fixed(t) => *t,
        }
    }

    pub fn timestamp(&self) -> String {
        self.now().to_rfc3339_opts(SecondsFormat::Millis, true)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipRecord {
    pub file: PathBuf,
    pub line: usize,
    pub column: usize,
    pub callee: String,
    pub test_name: Option<String>,
    pub matched: Vec<String>,
    pub dimensions: Vec<Dimension>,
    pub reason_summary: String,
    pub environment: Environment,
    pub timestamp: String,
    pub already_skipped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DimensionCounts {
    pub os: usize,
    pub node_version: usize,
    pub node_range: usize,
    pub browser: usize,
}

impl DimensionCounts {
    fn bump(&mut self, d: Dimension) {
        match d {
            Dimension::Os => self.os += 1,
            Dimension::NodeVersion => self.node_version += 1,
            Dimension::NodeRange => self.node_range += 1,
            Dimension::Browser => self.browser += 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    /// Records whose block was rewritten by this run.
    pub skipped: usize,
    pub already_skipped: usize,
    /// Records attributed to each dimension; a record with several matched
    /// dimensions counts once in each.
    pub dimensions: DimensionCounts,
}

impl Summary {
    pub fn from_records(records: &[SkipRecord]) -> Self {
        let mut summary = Summary {
            total: records.len(),
            ..Default::default()
        };
        for r in records {
            if r.already_skipped {
                summary.already_skipped += 1;
            } else {
                summary.skipped += 1;
            }
            for d in Dimension::ALL {
                if r.dimensions.contains(&d) {
                    summary.dimensions.bump(d);
                }
            }
        }
        summary
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ScanStats {
    pub files: usize,
    pub failed_files: usize,
    pub test_blocks: usize,
    /// Blocks decided skip whose modifier cannot be rewritten (`.each` and
    /// other member chains).
    pub unsanitized: usize,
}

impl std::ops::AddAssign for ScanStats {
    fn add_assign(&mut self, rhs: Self) {
        self.files += rhs.files;
        self.failed_files += rhs.failed_files;
        self.test_blocks += rhs.test_blocks;
        self.unsanitized += rhs.unsanitized;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: String,
    pub environment: Environment,
    pub records: Vec<SkipRecord>,
    pub summary: Summary,
    #[serde(default)]
    pub scan: ScanStats,
    #[serde(default)]
    pub diagnostics: Vec<Diagnostic>,
}

impl Report {
    pub fn with_scan(mut self, scan: ScanStats, diagnostics: Vec<Diagnostic>) -> Self {
        self.scan = scan;
        self.diagnostics = diagnostics;
        self
    }
}

pub fn build_report(mut records: Vec<SkipRecord>, env: &Environment) -> Report {
    records.sort_by(|a, b| (&a.file, a.line, a.column).cmp(&(&b.file, b.line, b.column)));
    let summary = Summary::from_records(&records);
    Report {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        environment: *env,
        records,
        summary,
        scan: ScanStats::default(),
        diagnostics: Vec::new(),
    }
}

/// Concatenates records and scan counts. The environment of the first report
/// is kept; every record still carries its own snapshot.
pub fn merge_reports(reports: Vec<Report>) -> Option<Report> {
    let env = reports.first()?.environment;
    let mut records = Vec::new();
    let mut scan = ScanStats::default();
    let mut diagnostics = Vec::new();
    for r in reports {
        records.extend(r.records);
        scan += r.scan;
        diagnostics.extend(r.diagnostics);
    }
    Some(build_report(records, &env).with_scan(scan, diagnostics))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum ReportFormat {
    #[default]
    Json,
    Text,
}

pub fn render_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn render_text(report: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "environment: {}", report.environment);
    let _ = writeln!(
        out,
        "skipped {} test(s) ({} newly, {} already skipped) in {} file(s), {} test block(s) scanned",
        report.summary.total,
        report.summary.skipped,
        report.summary.already_skipped,
        report.scan.files,
        report.scan.test_blocks
    );
    let d = report.summary.dimensions;
    let _ = writeln!(
        out,
        "by dimension: os {}, node_version {}, node_range {}, browser {}",
        d.os, d.node_version, d.node_range, d.browser
    );
    if report.records.is_empty() {
        return out;
    }
    let locations: Vec<String> = report
        .records
        .iter()
        .map(|r| format!("{}:{}:{}", r.file.display(), r.line, r.column))
        .collect();
    let width = locations
        .iter()
        .map(String::len)
        .max()
        .unwrap_or(0)
        .max("location".len());
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<width$}  {:<30}  reason", "location", "test");
    for (r, loc) in report.records.iter().zip(&locations) {
        let name = r.test_name.as_deref().unwrap_or("<dynamic>");
        let name = format!(
            "{}{}",
            r.callee,
            if name.is_empty() {
                String::new()
            } else {
                format!(" {name:?}")
            }
        );
        let reason = if r.already_skipped {
            format!("{} (already skipped)", r.reason_summary)
        } else {
            r.reason_summary.clone()
        };
        let _ = writeln!(out, "{loc:<width$}  {name:<30}  {reason}");
    }
    out
}

pub fn render(report: &Report, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => render_json(report),
        ReportFormat::Text => render_text(report),
    }
}

pub fn write_report(report: &Report, path: &Path, format: ReportFormat) -> Result<(), ReportError> {
    fs::write(path, render(report, format)).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_report(path: &Path) -> Result<Report, ReportError> {
    let text = fs::read_to_string(path).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let report: Report = serde_json::from_str(&text).map_err(|source| ReportError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    if report.schema_version != SCHEMA_VERSION {
        return Err(ReportError::Schema {
            path: path.to_path_buf(),
            found: report.schema_version,
        });
    }
    Ok(report)
}
