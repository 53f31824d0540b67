//! Skip decisions for one docblock against one environment.
//!
//! A block is skipped when any skip condition matches, or when some
//! dimension carries enable conditions none of which match. Values inside
//! one tag are alternatives; enable tags on different dimensions must all
//! hold. A skip condition wins over a matching enable condition.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::annotation::{Annotation, Dimension, Polarity};
use crate::diagnostic::Diagnostic;
use crate::environment::{normalize_browser, normalize_os, Browser, Environment};
use crate::version::{matches_prefix, parse_range, satisfies, VersionPrefix};

/// How enable and skip terms combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Composition {
    /// `enable-unmet OR skip-matched`.
    #[default]
    Disjunctive,
    /// `NOT(all enable conditions met) AND skip-matched`, the literal
    /// published formula. Kept for comparison only: under it, a docblock
    /// with only skip tags (vacuously meeting every enable condition) or
    /// only enable tags never skips.
    Conjunctive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationMatch {
    pub matched: bool,
    /// One entry per value that could not be interpreted. Such values match
    /// nothing.
    pub diagnostics: Vec<Diagnostic>,
}

pub fn annotation_matches(a: &Annotation, env: &Environment) -> AnnotationMatch {
    let mut diagnostics = Vec::new();
    let mut matched = false;
    for value in &a.values {
        let hit = match a.dimension {
            Dimension::Os => normalize_os(value).map(|os| os == env.os).map_err(|e| e.to_string()),
            Dimension::NodeVersion => VersionPrefix::parse(value)
                .map(|p| matches_prefix(&env.node_version, &p))
                .map_err(|e| e.to_string()),
            Dimension::NodeRange => parse_range(value)
                .map(|r| satisfies(&env.node_version, &r))
                .map_err(|e| e.to_string()),
            Dimension::Browser => normalize_browser(value)
                .map(|b| b != Browser::Unknown && env.browser != Browser::Unknown && b == env.browser)
                .map_err(|e| e.to_string()),
        };
        match hit {
            Ok(hit) => matched |= hit,
            Err(reason) => diagnostics.push(Diagnostic::warning(
                &a.location.file,
                a.location.line,
                format!("@{}: {reason}; value ignored", a.tag_name()),
            )),
        }
    }
    AnnotationMatch { matched, diagnostics }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchedCondition {
    pub annotation: Annotation,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SkipDecision {
    pub skip: bool,
    /// Every matched skip tag and every enable tag of an unmet dimension.
    /// Empty when `skip` is false.
    pub matched: Vec<MatchedCondition>,
    pub reason_summary: String,
    pub diagnostics: Vec<Diagnostic>,
}

fn env_value(dimension: Dimension, env: &Environment) -> String {
    match dimension {
        Dimension::Os => env.os.to_string(),
        Dimension::NodeVersion | Dimension::NodeRange => format!("node {}", env.node_version),
        Dimension::Browser => format!("browser {}", env.browser),
    }
}

pub fn should_skip(annotations: &[Annotation], env: &Environment) -> SkipDecision {
    should_skip_with(annotations, env, Composition::Disjunctive)
}

pub fn should_skip_with(annotations: &[Annotation], env: &Environment, composition: Composition) -> SkipDecision {
    let mut diagnostics = Vec::new();
    let mut skip_hits = Vec::new();
    // dimension -> (any enable matched, enable annotations)
    let mut enables: BTreeMap<Dimension, (bool, Vec<&Annotation>)> = BTreeMap::new();

    for a in annotations {
        let m = annotation_matches(a, env);
        diagnostics.extend(m.diagnostics);
        match a.polarity {
            Polarity::Skip if m.matched => skip_hits.push(MatchedCondition {
                annotation: a.clone(),
                reason: format!("{a} matched {}", env_value(a.dimension, env)),
            }),
            Polarity::Skip => {}
            Polarity::Enable => {
                let entry = enables.entry(a.dimension).or_default();
                entry.0 |= m.matched;
                entry.1.push(a);
            }
        }
    }

    let unmet: Vec<MatchedCondition> = enables
        .values()
        .filter(|(met, _)| !met)
        .flat_map(|(_, list)| list.iter())
        .map(|a| MatchedCondition {
            annotation: (*a).clone(),
            reason: format!("{a} not met by {}", env_value(a.dimension, env)),
        })
        .collect();

    let skip = match composition {
        Composition::Disjunctive => !skip_hits.is_empty() || !unmet.is_empty(),
        Composition::Conjunctive => !skip_hits.is_empty() && !unmet.is_empty(),
    };

    let mut matched = Vec::new();
    if skip {
        matched.extend(skip_hits);
        matched.extend(unmet);
    }
    let reason_summary = if !skip {
        String::new()
    } else {
        let mut s = String::new();
        for (i, m) in matched.iter().enumerate() {
            if i > 0 {
                s.push_str("; ");
            }
            let _ = write!(s, "{}", m.reason);
        }
        s
    };
    SkipDecision {
        skip,
        matched,
        reason_summary,
        diagnostics,
    }
}
