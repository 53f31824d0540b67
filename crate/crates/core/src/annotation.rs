//! Docblock tag parsing.
//!
//! ```text
//! tagline   := [ws] ["*"] [ws] "@" tagname ws valuelist ;
//! valuelist := value ("," [ws] value)* ;
//! ```
//!
//! Recognized tag names (matched case-insensitively) are `enableOnOs`,
//! `skipOnOs`, `enableOnNodeVersion`, `skipOnNodeVersion`,
//! `enableOnNodeRange`, `skipOnNodeRange`, `enableOnBrowser` and
//! `skipOnBrowser`. Any other `@tag` is kept as an unknown tag and otherwise
//! ignored.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostic::Diagnostic;
use crate::Span;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnnotationError {
    #[error("{file}:{line}: malformed value for @{tag}: {reason}")]
    MalformedTagValue {
        file: PathBuf,
        line: usize,
        tag: String,
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Malformed tags become diagnostics and are dropped.
    #[default]
    Lenient,
    /// The first malformed tag is an error.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Enable,
    Skip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Os,
    NodeVersion,
    NodeRange,
    Browser,
}

impl Dimension {
    pub const ALL: [Dimension; 4] = [
        Dimension::Os,
        Dimension::NodeVersion,
        Dimension::NodeRange,
        Dimension::Browser,
    ];

    fn tag_suffix(self) -> &'static str {
        match self {
            Dimension::Os => "Os",
            Dimension::NodeVersion => "NodeVersion",
            Dimension::NodeRange => "NodeRange",
            Dimension::Browser => "Browser",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dimension::Os => "os",
            Dimension::NodeVersion => "node_version",
            Dimension::NodeRange => "node_range",
            Dimension::Browser => "browser",
        })
    }
}

/// Canonical spelling of the tag for a polarity and dimension.
pub fn tag_name(polarity: Polarity, dimension: Dimension) -> String {
    let prefix = match polarity {
        Polarity::Enable => "enableOn",
        Polarity::Skip => "skipOn",
    };
    format!("{prefix}{}", dimension.tag_suffix())
}

fn lookup_tag(name: &str) -> Option<(Polarity, Dimension)> {
    let lower = name.to_ascii_lowercase();
    let (polarity, rest) = if let Some(rest) = lower.strip_prefix("enableon") {
        (Polarity::Enable, rest)
    } else {
        (Polarity::Skip, lower.strip_prefix("skipon")?)
    };
    let dimension = match rest {
        "os" => Dimension::Os,
        "nodeversion" => Dimension::NodeVersion,
        "noderange" => Dimension::NodeRange,
        "browser" => Dimension::Browser,
        _ => return None,
    };
    Some((polarity, dimension))
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SourceLocation {
    pub file: PathBuf,
    /// 1-based.
    pub line: usize,
}

impl SourceLocation {
    pub fn new(file: impl Into<PathBuf>, line: usize) -> Self {
        Self {
            file: file.into(),
            line,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub polarity: Polarity,
    pub dimension: Dimension,
    /// Lowercased and trimmed; never empty.
    pub values: Vec<String>,
    /// The tag line(s) as written. Merged duplicates are joined by `\n`.
    pub raw_text: String,
    pub location: SourceLocation,
}

impl Annotation {
    pub fn new(polarity: Polarity, dimension: Dimension, values: &[&str]) -> Self {
        let values: Vec<String> = values.iter().map(|v| normalize_value(v)).collect();
        let raw_text = format!("@{} {}", tag_name(polarity, dimension), values.join(","));
        Self {
            polarity,
            dimension,
            values,
            raw_text,
            location: SourceLocation::default(),
        }
    }

    pub fn tag_name(&self) -> String {
        tag_name(self.polarity, self.dimension)
    }

    /// `(polarity, dimension, values)`, ignoring where the tag was written.
    pub fn key(&self) -> (Polarity, Dimension, &[String]) {
        (self.polarity, self.dimension, &self.values)
    }
}

impl fmt::Display for Annotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{} {}", self.tag_name(), self.values.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Docblock {
    /// Comment text, with or without the `/**` `*/` delimiters.
    pub text: String,
    pub annotations: Vec<Annotation>,
    pub unknown_tags: Vec<String>,
    pub file: PathBuf,
    pub start_line: usize,
    pub end_line: usize,
    pub span: Span,
    /// Lenient-mode findings: dropped malformed tags.
    pub diagnostics: Vec<Diagnostic>,
}

/// Trims and lowercases a value. Idempotent.
pub fn normalize_value(raw: &str) -> String {
    raw.trim().to_lowercase()
}

fn strip_delimiters(text: &str) -> &str {
    let trimmed = text.trim();
    let Some(inner) = trimmed.strip_prefix("/**") else {
        return text;
    };
    inner.strip_suffix("*/").unwrap_or(inner)
}

/// Splits a tag line into `(tagname, rest)` when it has the tag form.
fn split_tag_line(line: &str) -> Option<(&str, &str)> {
    let s = line.trim_start();
    let s = s.strip_prefix('*').unwrap_or(s).trim_start();
    let s = s.strip_prefix('@')?;
    let end = s.find(char::is_whitespace).unwrap_or(s.len());
    let name = &s[..end];
    if name.is_empty() {
        return None;
    }
    Some((name, &s[end..]))
}

fn parse_values(dimension: Dimension, rest: &str) -> Result<Vec<String>, String> {
    let rest = rest.trim();
    if rest.is_empty() {
        return Err("empty value list".to_string());
    }
    rest.split(',')
        .map(|raw| {
            let value = normalize_value(raw);
            if value.is_empty() {
                return Err("empty value in list".to_string());
            }
            if value.contains(char::is_whitespace) {
                // Range expressions use spaces for conjunction.
                if dimension == Dimension::NodeRange {
                    return Ok(value.split_whitespace().collect::<Vec<_>>().join(" "));
                }
                return Err(format!("value `{value}` contains whitespace"));
            }
            Ok(value)
        })
        .collect()
}

/// Classifies every `@tag` line of a docblock. `location.line` is the line
/// on which `text` starts.
pub fn parse_docblock(text: &str, location: &SourceLocation, mode: ParseMode) -> Result<Docblock, AnnotationError> {
    let body = strip_delimiters(text);
    // Line offset of `body` relative to `text`; only nonzero if leading
    // whitespace before `/**` contained newlines.
    let lead = text.len() - text.trim_start().len();
    let offset_lines = text[..lead].matches('\n').count();

    let mut annotations: Vec<Annotation> = Vec::new();
    let mut unknown_tags = Vec::new();
    let mut diagnostics = Vec::new();

    for (idx, line) in body.split('\n').enumerate() {
        let Some((name, rest)) = split_tag_line(line) else {
            continue;
        };
        let Some((polarity, dimension)) = lookup_tag(name) else {
            unknown_tags.push(name.to_string());
            continue;
        };
        let line_no = location.line + offset_lines + idx;
        let values = match parse_values(dimension, rest) {
            Ok(values) => values,
            Err(reason) => {
                let err = AnnotationError::MalformedTagValue {
                    file: location.file.clone(),
                    line: line_no,
                    tag: name.to_string(),
                    reason,
                };
                match mode {
                    ParseMode::Strict => return Err(err),
                    ParseMode::Lenient => {
                        diagnostics.push(Diagnostic::warning(
                            &location.file,
                            line_no,
                            format!("dropped tag: {err}"),
                        ));
                        continue;
                    }
                }
            }
        };
        let raw = line.trim().trim_start_matches('*').trim().to_string();
        match annotations
            .iter_mut()
            .find(|a| a.polarity == polarity && a.dimension == dimension)
        {
            Some(existing) => {
                existing.values.extend(values);
                existing.raw_text.push('\n');
                existing.raw_text.push_str(&raw);
            }
            None => annotations.push(Annotation {
                polarity,
                dimension,
                values,
                raw_text: raw,
                location: SourceLocation::new(location.file.clone(), line_no),
            }),
        }
    }

    let start_line = location.line;
    Ok(Docblock {
        text: text.to_string(),
        annotations,
        unknown_tags,
        file: location.file.clone(),
        start_line,
        end_line: start_line + text.matches('\n').count(),
        span: Span::new(0, text.len()),
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn loc() -> SourceLocation {
        SourceLocation::new("t.test.js", 1)
    }

    fn parse(text: &str) -> Docblock {
        parse_docblock(text, &loc(), ParseMode::Lenient).unwrap()
    }

    /// Independent line classifier used as a reference: returns
    /// `(lowercased tag, values)` for each `@` line.
    fn reference_tags(text: &str) -> Vec<(String, Vec<String>)> {
        let mut out = Vec::new();
        for line in text.lines() {
            let mut chars = line.chars().peekable();
            while chars.peek().is_some_and(|c| c.is_whitespace()) {
                chars.next();
            }
            if chars.peek() == Some(&'*') {
                chars.next();
            }
            while chars.peek().is_some_and(|c| c.is_whitespace()) {
                chars.next();
            }
            if chars.next() != Some('@') {
                continue;
            }
            let rest: String = chars.collect();
            let mut parts = rest.splitn(2, char::is_whitespace);
            let tag = parts.next().unwrap_or("").to_lowercase();
            let values = parts
                .next()
                .unwrap_or("")
                .split(',')
                .map(|v| v.trim().to_lowercase())
                .filter(|v| !v.is_empty())
                .collect();
            out.push((tag, values));
        }
        out
    }

    #[test]
    fn snippet_tags() {
        let d = parse("/**\n  * @skipOnNodeVersion 20,22\n  */");
        assert_eq!(d.annotations.len(), 1);
        let a = &d.annotations[0];
        assert_eq!((a.polarity, a.dimension), (Polarity::Skip, Dimension::NodeVersion));
        assert_eq!(a.values, ["20", "22"]);
        assert_eq!(a.location.line, 2);
        assert_eq!(a.raw_text, "@skipOnNodeVersion 20,22");

        let d = parse("* @skipOnOS win32");
        assert_eq!(d.annotations[0].dimension, Dimension::Os);
        assert_eq!(d.annotations[0].values, ["win32"]);
    }

    #[test]
    fn plain_description() {
        let d = parse("* Some description, no tags");
        assert!(d.annotations.is_empty());
        assert!(d.unknown_tags.is_empty());
    }

    #[test]
    fn mixed_known_and_unknown() {
        let text = "* @param x input\n* @SKIPonos WIN32";
        let d = parse(text);
        assert_eq!(d.unknown_tags, ["param"]);
        assert_eq!(d.annotations.len(), 1);
        assert_eq!(
            d.annotations[0].key(),
            (Polarity::Skip, Dimension::Os, &["win32".to_string()][..])
        );
        // The reference classifier agrees on tag names and values.
        let reference = reference_tags(text);
        assert_eq!(reference[0].0, "param");
        assert_eq!(reference[1], ("skiponos".to_string(), vec!["win32".to_string()]));
    }

    #[test]
    fn prefix_forms_are_equivalent() {
        for text in [
            "* @skipOnOs linux",
            "@skipOnOs linux",
            "   @skipOnOs linux",
            "  *   @skipOnOs linux",
        ] {
            let d = parse(text);
            assert_eq!(d.annotations.len(), 1, "{text:?}");
            assert_eq!(d.annotations[0].values, ["linux"]);
        }
    }

    #[test]
    fn single_line_docblock() {
        let d = parse("/** @enableOnBrowser Chrome, firefox */");
        assert_eq!(d.annotations[0].values, ["chrome", "firefox"]);
    }

    #[test]
    fn duplicates_merge_in_order() {
        let d = parse("* @skipOnOs win32\n* @enableOnOs linux\n* @skipOnOS darwin");
        assert_eq!(d.annotations.len(), 2);
        assert_eq!(d.annotations[0].values, ["win32", "darwin"]);
        assert_eq!(d.annotations[0].raw_text, "@skipOnOs win32\n@skipOnOS darwin");
        assert_eq!(d.annotations[1].polarity, Polarity::Enable);
    }

    #[test]
    fn malformed_values() {
        for text in [
            "* @skipOnOs",
            "* @skipOnOs   ",
            "* @skipOnOs win32,",
            "* @skipOnOs ,linux",
            "* @skipOnOs win 32",
        ] {
            let d = parse(text);
            assert!(d.annotations.is_empty(), "{text:?}");
            assert_eq!(d.diagnostics.len(), 1, "{text:?}");
            assert!(matches!(
                parse_docblock(text, &loc(), ParseMode::Strict),
                Err(AnnotationError::MalformedTagValue { .. })
            ));
        }
        // Unknown tags never fail, with or without values.
        assert!(parse_docblock("* @deprecated", &loc(), ParseMode::Strict).is_ok());
    }

    #[test]
    fn range_values_keep_inner_spaces() {
        let d = parse("* @enableOnNodeRange >=18   <21, 22");
        assert_eq!(d.annotations[0].values, [">=18 <21", "22"]);
    }

    #[test]
    fn crlf_lines() {
        let d = parse("/**\r\n * @skipOnOs win32\r\n */");
        assert_eq!(d.annotations[0].values, ["win32"]);
        assert_eq!(d.end_line, 3);
    }

    const TAGS: [&str; 8] = [
        "enableOnOs",
        "skipOnOs",
        "enableOnNodeVersion",
        "skipOnNodeVersion",
        "enableOnNodeRange",
        "skipOnNodeRange",
        "enableOnBrowser",
        "skipOnBrowser",
    ];

    #[test]
    fn all_eight_tags_round_trip_names() {
        for tag in TAGS {
            let d = parse(&format!("* @{tag} x"));
            assert_eq!(d.annotations[0].tag_name(), tag);
        }
    }

    proptest! {
        #[test]
        fn case_insensitive(tag in 0usize..8, values in proptest::collection::vec("[a-zA-Z0-9.]{1,6}", 1..4)) {
            let line = format!(" * @{} {}", TAGS[tag], values.join(", "));
            let a = parse(&line);
            let b = parse(&line.to_uppercase());
            let keys_a: Vec<_> = a.annotations.iter().map(Annotation::key).collect();
            let keys_b: Vec<_> = b.annotations.iter().map(Annotation::key).collect();
            prop_assert_eq!(keys_a, keys_b);
        }

        #[test]
        fn comma_count_gives_value_count(values in proptest::collection::vec("[a-z0-9]{1,5}", 1..6), pad in " {0,2}") {
            let line = format!("* @skipOnBrowser {}", values.join(&format!("{pad},{pad}")));
            let d = parse(&line);
            prop_assert_eq!(d.annotations[0].values.len(), values.len());
        }

        #[test]
        fn lenient_is_total(text in "\\PC{0,200}") {
            prop_assert!(parse_docblock(&text, &loc(), ParseMode::Lenient).is_ok());
        }

        #[test]
        fn normalization_idempotent(raw in "\\PC{0,20}") {
            let once = normalize_value(&raw);
            prop_assert_eq!(normalize_value(&once), once.clone());
        }
    }
}
