//! Rewrites skip-decided test blocks into framework-native skips.
//!
//! The only edits ever made are inserting `.skip` after a bare callee
//! (`it(` → `it.skip(`) and replacing an `only` member with `skip`
//! (`describe.only(` → `describe.skip(`). Every other byte, including line
//! endings, is left as is.

use std::borrow::Cow;
use std::path::{Path, PathBuf};

use crate::annotation::{Dimension, ParseMode};
use crate::diagnostic::{Diagnostic, Severity};
use crate::environment::Environment;
use crate::evaluator::{should_skip_with, Composition, SkipDecision};
use crate::report::{Clock, SkipRecord};
use crate::scanner::{scan_source, Modifier, ScanError, TestBlock};

/// Replace `delete_len` bytes at `at` with `insert`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edit {
    pub at: usize,
    pub delete_len: usize,
    pub insert: String,
}

impl Edit {
    pub fn is_noop(&self) -> bool {
        self.delete_len == 0 && self.insert.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TransformError {
    #[error("cannot rewrite `{callee}.{modifier}` blocks")]
    UnsupportedModifier { callee: String, modifier: String },
}

/// The edit that turns `block` into a skipped block.
pub fn plan_skip_edit(block: &TestBlock) -> Result<Edit, TransformError> {
    match &block.modifier {
        Modifier::None => Ok(Edit {
            at: block.callee_span.end,
            delete_len: 0,
            insert: ".skip".to_string(),
        }),
        Modifier::Only => {
            let span = block.modifier_span.expect("single-member chain has a span");
            Ok(Edit {
                at: span.start,
                delete_len: span.len(),
                insert: "skip".to_string(),
            })
        }
        Modifier::Skip => Ok(Edit {
            at: block.callee_span.end,
            delete_len: 0,
            insert: String::new(),
        }),
        Modifier::Each => Err(TransformError::UnsupportedModifier {
            callee: block.callee.clone(),
            modifier: "each".to_string(),
        }),
        Modifier::OtherMember(name) => Err(TransformError::UnsupportedModifier {
            callee: block.callee.clone(),
            modifier: name.clone(),
        }),
    }
}

/// Applies non-overlapping edits. `edits` must be sorted by offset.
pub fn apply_edits(source: &[u8], edits: &[Edit]) -> Vec<u8> {
    let extra: usize = edits.iter().map(|e| e.insert.len()).sum();
    let mut out = Vec::with_capacity(source.len() + extra);
    let mut pos = 0;
    for e in edits {
        debug_assert!(e.at >= pos, "edits overlap or are unsorted");
        out.extend_from_slice(&source[pos..e.at]);
        out.extend_from_slice(e.insert.as_bytes());
        pos = e.at + e.delete_len;
    }
    out.extend_from_slice(&source[pos..]);
    out
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SanitizeOptions {
    pub mode: ParseMode,
    pub composition: Composition,
    pub clock: Clock,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SanitizedFile {
    pub path: PathBuf,
    pub original_bytes: Vec<u8>,
    pub transformed_bytes: Vec<u8>,
    /// Applied edits, ascending. No-op edits for already-skipped blocks are
    /// not included.
    pub edits: Vec<Edit>,
    pub records: Vec<SkipRecord>,
    pub diagnostics: Vec<Diagnostic>,
    pub test_blocks: usize,
    /// Skip-decided blocks that could not be rewritten.
    pub unsanitized: usize,
    /// Set when the file could not be scanned and was passed through.
    pub failed: bool,
}

impl SanitizedFile {
    pub fn changed(&self) -> bool {
        self.original_bytes != self.transformed_bytes
    }

    pub fn transformed_text(&self) -> Cow<'_, str> {
        String::from_utf8_lossy(&self.transformed_bytes)
    }

    /// Records for blocks rewritten by this run.
    pub fn pending(&self) -> usize {
        self.records.iter().filter(|r| !r.already_skipped).count()
    }
}

fn passthrough(path: &Path, source: &[u8], diagnostic: Diagnostic) -> SanitizedFile {
    SanitizedFile {
        path: path.to_path_buf(),
        original_bytes: source.to_vec(),
        transformed_bytes: source.to_vec(),
        edits: Vec::new(),
        records: Vec::new(),
        diagnostics: vec![diagnostic],
        test_blocks: 0,
        unsanitized: 0,
        failed: true,
    }
}

fn scan_failure_line(err: &ScanError) -> usize {
    match err {
        ScanError::UnterminatedLiteral { line, .. } => *line,
        ScanError::Annotation(crate::annotation::AnnotationError::MalformedTagValue { line, .. }) => *line,
        ScanError::EncodingError { .. } => 0,
    }
}

/// Scans, decides and rewrites one file. In strict mode scan failures are
/// returned; in lenient mode the file passes through unchanged with an error
/// diagnostic.
pub fn sanitize_source(
    source: &[u8],
    path: impl AsRef<Path>,
    env: &Environment,
    options: &SanitizeOptions,
) -> Result<SanitizedFile, ScanError> {
    let path = path.as_ref();
    let text = match std::str::from_utf8(source) {
        Ok(text) => text,
        Err(e) => {
            let err = ScanError::EncodingError {
                file: path.to_path_buf(),
                offset: e.valid_up_to(),
            };
            return match options.mode {
                ParseMode::Strict => Err(err),
                ParseMode::Lenient => Ok(passthrough(
                    path,
                    source,
                    Diagnostic::new(Severity::Error, path, 0, err.to_string()),
                )),
            };
        }
    };
    let scanned = match scan_source(text, path, options.mode) {
        Ok(scanned) => scanned,
        Err(err) => {
            return match options.mode {
                ParseMode::Strict => Err(err),
                ParseMode::Lenient => Ok(passthrough(
                    path,
                    source,
                    Diagnostic::new(
                        Severity::Error,
                        path,
                        scan_failure_line(&err),
                        format!("{err}; file left unchanged"),
                    ),
                )),
            };
        }
    };

    let mut diagnostics = scanned.diagnostics;
    let mut edits = Vec::new();
    let mut records = Vec::new();
    let mut unsanitized = 0;
    let mut decided_skip = vec![false; scanned.blocks.len()];
    let timestamp = options.clock.timestamp();

    for (i, block) in scanned.blocks.iter().enumerate() {
        let Some(doc) = &block.docblock else {
            continue;
        };
        if doc.annotations.is_empty() {
            continue;
        }
        let decision = should_skip_with(&doc.annotations, env, options.composition);
        diagnostics.extend(decision.diagnostics.iter().cloned());
        if !decision.skip {
            if let Some(p) = block.parent.filter(|&p| decided_skip[p]) {
                diagnostics.push(Diagnostic::new(
                    Severity::Info,
                    path,
                    block.line,
                    format!(
                        "{} runs by its own annotations but the enclosing {} at line {} is skipped",
                        block.callee, scanned.blocks[p].callee, scanned.blocks[p].line
                    ),
                ));
            }
            continue;
        }
        decided_skip[i] = true;
        match plan_skip_edit(block) {
            Ok(edit) => {
                let already_skipped = edit.is_noop();
                if !already_skipped {
                    edits.push(edit);
                }
                records.push(make_record(path, block, &decision, env, &timestamp, already_skipped));
            }
            Err(err) => {
                unsanitized += 1;
                diagnostics.push(Diagnostic::warning(
                    path,
                    block.line,
                    format!("{err}; test left unchanged"),
                ));
            }
        }
    }

    edits.sort_by_key(|e| e.at);
    let transformed_bytes = apply_edits(source, &edits);
    Ok(SanitizedFile {
        path: path.to_path_buf(),
        original_bytes: source.to_vec(),
        transformed_bytes,
        edits,
        records,
        diagnostics,
        test_blocks: scanned.blocks.len(),
        unsanitized,
        failed: false,
    })
}

fn make_record(
    path: &Path,
    block: &TestBlock,
    decision: &SkipDecision,
    env: &Environment,
    timestamp: &str,
    already_skipped: bool,
) -> SkipRecord {
    let mut dimensions: Vec<Dimension> = decision.matched.iter().map(|m| m.annotation.dimension).collect();
    dimensions.sort();
    dimensions.dedup();
    SkipRecord {
        file: path.to_path_buf(),
        line: block.line,
        column: block.column,
        callee: block.callee.clone(),
        test_name: block.name.clone(),
        matched: decision.matched.iter().map(|m| m.annotation.raw_text.clone()).collect(),
        dimensions,
        reason_summary: decision.reason_summary.clone(),
        environment: *env,
        timestamp: timestamp.to_string(),
        already_skipped,
    }
}
