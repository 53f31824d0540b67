//! Node.js version values: exact versions, leading-component prefixes, and a
//! small closed range grammar.
//!
//! Range grammar:
//!
//! ```text
//! range      := conjunct ( "||" conjunct )* ;
//! conjunct   := comparator ( ws comparator )* ;
//! comparator := [ op [ws] ] version ;
//! op         := "<" | "<=" | ">" | ">=" | "=" ;
//! version    := ["v"] digits [ "." digits [ "." digits ] ] ;
//! ```
//!
//! Ordering comparators pad a partial version with zeros (`<21` means
//! `<21.0.0`). A bare version or `=` on a partial version is a prefix match,
//! so `18` accepts every `18.x.y`. Caret, tilde, hyphen ranges, wildcards and
//! prerelease tags are rejected.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VersionError {
    #[error("invalid version `{0}`")]
    InvalidVersion(String),
    #[error("invalid range `{range}`: {reason}")]
    InvalidRange { range: String, reason: String },
}

/// A `major.minor.patch` triple, totally ordered lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Version {
    pub major: u64,
    pub minor: u64,
    pub patch: u64,
}

impl Version {
    pub const fn new(major: u64, minor: u64, patch: u64) -> Self {
        Self { major, minor, patch }
    }

    fn components(&self) -> [u64; 3] {
        [self.major, self.minor, self.patch]
    }
}

/// Parses `d+(.d+(.d+)?)?` with an optional `v` prefix. Missing components
/// default to zero.
pub fn parse_version(text: &str) -> Result<Version, VersionError> {
    let prefix = parse_components(text)?;
    Ok(prefix.padded())
}

fn parse_components(text: &str) -> Result<VersionPrefix, VersionError> {
    let invalid = || VersionError::InvalidVersion(text.to_string());
    let body = text
        .strip_prefix('v')
        .or_else(|| text.strip_prefix('V'))
        .unwrap_or(text);
    if body.is_empty() {
        return Err(invalid());
    }
    let mut components = Vec::with_capacity(3);
    for part in body.split('.') {
        if part.is_empty() || !part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(invalid());
        }
        components.push(part.parse::<u64>().map_err(|_| invalid())?);
    }
    if components.len() > 3 {
        return Err(invalid());
    }
    Ok(VersionPrefix { components })
}

impl FromStr for Version {
    type Err = VersionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_version(s)
    }
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}.{}", self.major, self.minor, self.patch)
    }
}

impl Serialize for Version {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Version {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_version(&s).map_err(serde::de::Error::custom)
    }
}

/// One to three leading version components, e.g. `20` or `20.19`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VersionPrefix {
    components: Vec<u64>,
}

impl VersionPrefix {
    pub fn new(components: Vec<u64>) -> Result<Self, VersionError> {
        if components.is_empty() || components.len() > 3 {
            let text = components.iter().map(u64::to_string).collect::<Vec<_>>().join(".");
            return Err(VersionError::InvalidVersion(text));
        }
        Ok(Self { components })
    }

    pub fn parse(text: &str) -> Result<Self, VersionError> {
        parse_components(text)
    }

    pub fn components(&self) -> &[u64] {
        &self.components
    }

    fn padded(&self) -> Version {
        let c = |i: usize| self.components.get(i).copied().unwrap_or(0);
        Version::new(c(0), c(1), c(2))
    }
}

impl fmt::Display for VersionPrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for c in &self.components {
            if !first {
                f.write_str(".")?;
            }
            first = false;
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// True iff the leading `p.len()` components of `v` equal `p`.
pub fn matches_prefix(v: &Version, p: &VersionPrefix) -> bool {
    v.components().iter().zip(p.components.iter()).all(|(a, b)| a == b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operator {
    Less,
    LessEq,
    Greater,
    GreaterEq,
    Eq,
}

impl Operator {
    fn as_str(self) -> &'static str {
        match self {
            Operator::Less => "<",
            Operator::LessEq => "<=",
            Operator::Greater => ">",
            Operator::GreaterEq => ">=",
            Operator::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Comparator {
    pub op: Operator,
    pub version: VersionPrefix,
}

impl Comparator {
    pub fn holds(&self, v: &Version) -> bool {
        if self.op == Operator::Eq {
            return matches_prefix(v, &self.version);
        }
        let ord = v.cmp(&self.version.padded());
        match self.op {
            Operator::Less => ord == Ordering::Less,
            Operator::LessEq => ord != Ordering::Greater,
            Operator::Greater => ord == Ordering::Greater,
            Operator::GreaterEq => ord != Ordering::Less,
            Operator::Eq => unreachable!(),
        }
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.op.as_str(), self.version)
    }
}

/// Disjunction of conjunctions of comparators.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VersionRange {
    disjuncts: Vec<Vec<Comparator>>,
}

impl VersionRange {
    pub fn disjuncts(&self) -> &[Vec<Comparator>] {
        &self.disjuncts
    }
}

impl fmt::Display for VersionRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, conj) in self.disjuncts.iter().enumerate() {
            if i > 0 {
                f.write_str(" || ")?;
            }
            for (j, cmp) in conj.iter().enumerate() {
                if j > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{cmp}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for VersionRange {
    type Err = VersionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_range(s)
    }
}

pub fn parse_range(text: &str) -> Result<VersionRange, VersionError> {
    let invalid = |reason: String| VersionError::InvalidRange {
        range: text.to_string(),
        reason,
    };
    let mut disjuncts = Vec::new();
    for part in text.split("||") {
        let mut conj = Vec::new();
        let mut tokens = part.split_whitespace();
        while let Some(token) = tokens.next() {
            let (op, rest) = split_operator(token);
            let version_text = match (op, rest.is_empty()) {
                // `>= 18` style: the operator stands alone.
                (Some(_), true) => tokens
                    .next()
                    .ok_or_else(|| invalid(format!("operator `{token}` has no version")))?,
                _ => rest,
            };
            let version =
                VersionPrefix::parse(version_text).map_err(|_| invalid(format!("unsupported comparator `{token}`")))?;
            conj.push(Comparator {
                op: op.unwrap_or(Operator::Eq),
                version,
            });
        }
        if conj.is_empty() {
            return Err(invalid("empty disjunct".to_string()));
        }
        disjuncts.push(conj);
    }
    Ok(VersionRange { disjuncts })
}

fn split_operator(token: &str) -> (Option<Operator>, &str) {
    const OPS: [(&str, Operator); 5] = [
        (">=", Operator::GreaterEq),
        ("<=", Operator::LessEq),
        (">", Operator::Greater),
        ("<", Operator::Less),
        ("=", Operator::Eq),
    ];
    for (sym, op) in OPS {
        if let Some(rest) = token.strip_prefix(sym) {
            return (Some(op), rest);
        }
    }
    (None, token)
}

pub fn satisfies(v: &Version, range: &VersionRange) -> bool {
    range.disjuncts.iter().any(|conj| conj.iter().all(|c| c.holds(v)))
}
