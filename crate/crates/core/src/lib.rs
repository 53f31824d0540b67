//! Docblock-driven skipping of environment-dependent JavaScript tests.
//!
//! Test files annotate `describe`/`it`/`test` blocks with tags such as
//! `@skipOnOs win32` or `@enableOnNodeRange >=18 <21`. This crate detects
//! the current environment, decides per block whether it must be skipped,
//! rewrites the source so those blocks become framework-native skips
//! (`it` → `it.skip`), and records every decision in a report. It also
//! predicts skip decisions across an OS × Node.js × browser matrix and
//! classifies rerun outcome logs into stable, environment-dependent and
//! flaky tests.
//!
//! ```
//! use envsan::{sanitize_source, Browser, Environment, Os, SanitizeOptions, Version};
//!
//! let src = "/** @skipOnOs win32 */\nit('uses posix paths', () => {});\n";
//! let env = Environment::new(Os::Win32, Version::new(20, 19, 1), Browser::Unknown);
//! let out = sanitize_source(src.as_bytes(), "a.test.js", &env, &SanitizeOptions::default()).unwrap();
//! assert_eq!(out.transformed_text(), "/** @skipOnOs win32 */\nit.skip('uses posix paths', () => {});\n");
//! assert_eq!(out.records.len(), 1);
//! ```

use serde::{Deserialize, Serialize};

pub mod annotation;
pub mod classify;
pub mod cli;
pub mod diagnostic;
pub mod environment;
pub mod evaluator;
pub mod matrix;
pub mod report;
pub mod scanner;
pub mod transform;
pub mod version;

pub use annotation::{parse_docblock, Annotation, Dimension, Docblock, ParseMode, Polarity, SourceLocation};
pub use classify::{classify_outcomes, FlakinessClassification, OutcomeRecord};
pub use diagnostic::{Diagnostic, Severity};
pub use environment::{detect_environment, normalize_os, Browser, EnvOverrides, Environment, Os, SystemProbe};
pub use evaluator::{annotation_matches, should_skip, Composition, SkipDecision};
pub use matrix::{emit_workflow_template, expand_matrix, predict_skip_matrix, MatrixConfig};
pub use report::{build_report, read_report, write_report, Report, ReportFormat, SkipRecord};
pub use scanner::{locate_test_blocks, scan_source, tokenize, Modifier, TestBlock, Token, TokenKind};
pub use transform::{plan_skip_edit, sanitize_source, Edit, SanitizeOptions, SanitizedFile};
pub use version::{matches_prefix, parse_range, parse_version, satisfies, Version, VersionPrefix, VersionRange};

/// Half-open byte range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub const fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub const fn len(&self) -> usize {
        self.end - self.start
    }

    pub const fn is_empty(&self) -> bool {
        self.start == self.end
    }
}
