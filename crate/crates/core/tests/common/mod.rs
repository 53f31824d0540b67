//! Shared helpers and independent oracles for the integration tests.
//!
//! Nothing here calls into the evaluator or the range parser: predicates are
//! written out by hand so they can be compared against the library.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use chrono::{TimeZone, Utc};
use envsan::report::Clock;
use envsan::{Browser, Environment, Os, Version};

pub const FIXED_TIME: &str = "2025-05-01T12:00:00.000Z";

pub fn fixed_clock() -> Clock {
    Clock::Fixed(Utc.with_ymd_and_hms(2025, 5, 1, 12, 0, 0).unwrap())
}

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn env(os: Os, v: (u64, u64, u64), browser: Browser) -> Environment {
    Environment::new(os, Version::new(v.0, v.1, v.2), browser)
}

/// The nine hosted runner environments, written out independently of the
/// library table.
pub fn runner_envs() -> Vec<Environment> {
    use Browser::*;
    use Os::*;
    vec![
        env(Linux, (18, 20, 8), Chrome),
        env(Linux, (20, 19, 1), Edge),
        env(Linux, (22, 15, 0), Firefox),
        env(Darwin, (18, 20, 8), Chrome),
        env(Darwin, (20, 19, 1), Safari),
        env(Darwin, (22, 15, 0), Unknown),
        env(Win32, (18, 20, 8), Chrome),
        env(Win32, (20, 19, 1), Edge),
        env(Win32, (22, 15, 0), Firefox),
    ]
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Dim {
    Os,
    NodeVersion,
    NodeRange,
    Browser,
}

/// One annotation of the oracle pool with its hand-written predicate.
pub struct PoolEntry {
    pub line: &'static str,
    pub skip: bool,
    pub dim: Dim,
    pub holds: fn(&Environment) -> bool,
}

fn os(e: &Environment) -> &'static str {
    e.os.as_str()
}

fn triple(e: &Environment) -> (u64, u64, u64) {
    (e.node_version.major, e.node_version.minor, e.node_version.patch)
}

fn browser(e: &Environment) -> &'static str {
    match e.browser {
        Browser::Chrome => "chrome",
        Browser::Firefox => "firefox",
        Browser::Safari => "safari",
        Browser::Edge => "edge",
        Browser::Unknown => "unknown",
    }
}

/// Twelve annotations covering all eight tags.
pub const POOL: [PoolEntry; 12] = [
    PoolEntry {
        line: "@enableOnOs linux",
        skip: false,
        dim: Dim::Os,
        holds: |e| os(e) == "linux",
    },
    PoolEntry {
        line: "@skipOnOs win32",
        skip: true,
        dim: Dim::Os,
        holds: |e| os(e) == "win32",
    },
    PoolEntry {
        line: "@skipOnOS MacOS, Ubuntu",
        skip: true,
        dim: Dim::Os,
        holds: |e| matches!(os(e), "darwin" | "linux"),
    },
    PoolEntry {
        line: "@enableOnNodeVersion 18",
        skip: false,
        dim: Dim::NodeVersion,
        holds: |e| triple(e).0 == 18,
    },
    PoolEntry {
        line: "@skipOnNodeVersion 20,22",
        skip: true,
        dim: Dim::NodeVersion,
        holds: |e| matches!(triple(e).0, 20 | 22),
    },
    PoolEntry {
        line: "@skipOnNodeVersion 22.15.0",
        skip: true,
        dim: Dim::NodeVersion,
        holds: |e| triple(e) == (22, 15, 0),
    },
    PoolEntry {
        line: "@enableOnNodeRange >=18 <21",
        skip: false,
        dim: Dim::NodeRange,
        holds: |e| triple(e) >= (18, 0, 0) && triple(e) < (21, 0, 0),
    },
    PoolEntry {
        line: "@skipOnNodeRange >=22",
        skip: true,
        dim: Dim::NodeRange,
        holds: |e| triple(e) >= (22, 0, 0),
    },
    PoolEntry {
        line: "@enableOnNodeRange 18 || >=22",
        skip: false,
        dim: Dim::NodeRange,
        holds: |e| triple(e).0 == 18 || triple(e) >= (22, 0, 0),
    },
    PoolEntry {
        line: "@enableOnBrowser chrome,firefox",
        skip: false,
        dim: Dim::Browser,
        holds: |e| matches!(browser(e), "chrome" | "firefox"),
    },
    PoolEntry {
        line: "@skipOnBrowser safari",
        skip: true,
        dim: Dim::Browser,
        holds: |e| browser(e) == "safari",
    },
    PoolEntry {
        line: "@enableOnOs win32,darwin",
        skip: false,
        dim: Dim::Os,
        holds: |e| matches!(os(e), "win32" | "darwin"),
    },
];

/// Default composition: skip when any skip condition holds, or when some
/// dimension carries enable conditions none of which holds.
pub fn oracle_skip(ids: &[usize], e: &Environment) -> bool {
    let skip_hit = ids.iter().any(|&i| POOL[i].skip && (POOL[i].holds)(e));
    let enable_miss = [Dim::Os, Dim::NodeVersion, Dim::NodeRange, Dim::Browser]
        .iter()
        .any(|d| {
            let enables: Vec<usize> = ids
                .iter()
                .copied()
                .filter(|&i| !POOL[i].skip && POOL[i].dim == *d)
                .collect();
            !enables.is_empty() && !enables.iter().any(|&i| (POOL[i].holds)(e))
        });
    skip_hit || enable_miss
}

/// Compatibility composition: skip iff not every enable condition holds and
/// some skip condition holds. Repeated tags of one dimension merge into a
/// single condition, so enables are checked per dimension.
pub fn oracle_skip_conjunctive(ids: &[usize], e: &Environment) -> bool {
    let all_enabled = [Dim::Os, Dim::NodeVersion, Dim::NodeRange, Dim::Browser]
        .iter()
        .all(|d| {
            let enables: Vec<usize> = ids
                .iter()
                .copied()
                .filter(|&i| !POOL[i].skip && POOL[i].dim == *d)
                .collect();
            enables.is_empty() || enables.iter().any(|&i| (POOL[i].holds)(e))
        });
    let any_skip = ids.iter().any(|&i| POOL[i].skip && (POOL[i].holds)(e));
    !all_enabled && any_skip
}

pub fn docblock(ids: &[usize], indent: &str, nl: &str) -> String {
    let mut s = format!("{indent}/**{nl}");
    for &i in ids {
        s.push_str(&format!("{indent} * {}{nl}", POOL[i].line));
    }
    s.push_str(&format!("{indent} */{nl}"));
    s
}

/// All subsets of `0..n` with at most `k` elements, in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(cur.clone());
        if cur.len() == k {
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Planted {
    Plain,
    Only,
    Skip,
    Each,
}

/// A real, annotated test call placed by the corpus generator.
#[derive(Clone, Debug)]
pub struct PlantedBlock {
    pub ids: Vec<usize>,
    pub kind: Planted,
    /// Whether an enclosing block also carries annotations.
    pub nested: bool,
}

pub struct CorpusFile {
    pub name: String,
    pub text: String,
    pub planted: Vec<PlantedBlock>,
    /// Test calls that actually run (annotated or not).
    pub real_blocks: usize,
}

/// Deterministic pseudo-random corpus exercising template literals, regex
/// literals, comments, strings, CRLF and modifiers.
pub fn corpus(n: usize) -> Vec<CorpusFile> {
    (0..n).map(corpus_file).collect()
}

fn pick(i: usize, salt: usize) -> Vec<usize> {
    let all = subsets(POOL.len(), 2);
    let idx = (i * 7919 + salt * 104_729) % (all.len() - 1) + 1;
    all[idx].clone()
}

fn corpus_file(i: usize) -> CorpusFile {
    let nl = match i % 4 {
        1 => "\r\n",
        _ => "\n",
    };
    let ext = ["js", "ts", "mjs", "jsx", "cjs"][i % 5];
    let mut planted = Vec::new();
    let mut real_blocks = 0;
    let mut t = String::new();
    let line = |t: &mut String, s: &str| {
        t.push_str(s);
        t.push_str(nl);
    };

    line(&mut t, "'use strict';");
    line(
        &mut t,
        "// it('commented out', () => {}); /** @skipOnOs linux */ test('x')",
    );
    line(&mut t, "const path = require('path');");
    line(&mut t, &format!("const ratio = total / count / {};", i + 2));
    line(
        &mut t,
        "const re = /it\\('x'\\)\\/[a-z]+/gi, other = /describe.only\\(/;",
    );
    line(
        &mut t,
        "const tpl = `it('not a test') ${path.sep} describe.only('nope') ${`inner ${'it(\"no\")'}`}`;",
    );
    line(&mut t, "const s = \"test('in a string')\" + 'it.only(\"also\")';");
    line(&mut t, "/* block comment with describe('fake', () => {}) */");

    let outer = if i.is_multiple_of(3) { pick(i, 1) } else { Vec::new() };
    if !outer.is_empty() {
        t.push_str(&docblock(&outer, "", nl));
    }
    line(&mut t, &format!("describe('suite {i}', () => {{"));
    real_blocks += 1;
    if !outer.is_empty() {
        planted.push(PlantedBlock {
            ids: outer.clone(),
            kind: Planted::Plain,
            nested: false,
        });
    }
    line(&mut t, "  beforeEach(() => { x = a++ / 2; });");

    let kinds = [
        Planted::Plain,
        Planted::Only,
        Planted::Skip,
        Planted::Plain,
        Planted::Each,
        Planted::Plain,
    ];
    let count = 3 + i % 4;
    for j in 0..count {
        let kind = kinds[(i + j) % kinds.len()];
        let annotated = (i + j) % 5 != 4;
        let ids = if annotated { pick(i, j + 2) } else { Vec::new() };
        if annotated {
            t.push_str(&docblock(&ids, "  ", nl));
        } else {
            line(&mut t, "  // plain test");
        }
        let callee = ["it", "test", "it", "specify"][j % 4];
        let call = match kind {
            Planted::Plain => format!("  {callee}('case {j}', async () => {{"),
            Planted::Only => format!("  {callee}.only('case {j}', () => {{"),
            Planted::Skip => format!("  {callee}.skip('case {j}', () => {{"),
            Planted::Each => format!("  {callee}.each([[1], [2]])('case {j} %i', (n) => {{"),
        };
        line(&mut t, &call);
        real_blocks += 1;
        if annotated {
            planted.push(PlantedBlock {
                ids,
                kind,
                nested: !outer.is_empty(),
            });
        }
        line(
            &mut t,
            &format!("    const m = `row ${{n}} / ${{{j}}}`.match(/(\\d+)\\//);"),
        );
        line(
            &mut t,
            "    expect(m === null ? 0 : m.length / 2).toBeGreaterThanOrEqual(0);",
        );
        line(&mut t, "  });");
    }
    line(&mut t, "});");
    if i % 7 == 3 {
        // trailing content without a final newline
        t.push_str("module.exports = { ratio };");
    }
    CorpusFile {
        name: format!("case{i:03}.test.{ext}"),
        text: t,
        planted,
        real_blocks,
    }
}

/// Counts of CRLF, lone CR and lone LF.
pub fn line_endings(b: &[u8]) -> (usize, usize, usize) {
    let (mut crlf, mut cr, mut lf) = (0, 0, 0);
    let mut i = 0;
    while i < b.len() {
        match b[i] {
            b'\r' if b.get(i + 1) == Some(&b'\n') => {
                crlf += 1;
                i += 1;
            }
            b'\r' => cr += 1,
            b'\n' => lf += 1,
            _ => {}
        }
        i += 1;
    }
    (crlf, cr, lf)
}

/// Checks that `after` differs from `before` only by `.skip` insertions
/// directly after a callee identifier or `only` → `skip` replacements.
/// Returns the number of such changes.
pub fn surgical_diff(before: &[u8], after: &[u8]) -> Result<usize, String> {
    let (mut i, mut j, mut changes) = (0, 0, 0);
    while i < before.len() || j < after.len() {
        if i < before.len() && j < after.len() && before[i] == after[j] {
            i += 1;
            j += 1;
            continue;
        }
        if after[j..].starts_with(b".skip") && ident_ends_at(before, i) {
            j += 5;
            changes += 1;
            continue;
        }
        if i > 0 && before[i - 1] == b'.' && before[i..].starts_with(b"only") && after[j..].starts_with(b"skip") {
            i += 4;
            j += 4;
            changes += 1;
            continue;
        }
        return Err(format!("unexpected change at byte {i}"));
    }
    Ok(changes)
}

fn ident_ends_at(b: &[u8], i: usize) -> bool {
    i > 0 && (b[i - 1].is_ascii_alphanumeric() || b[i - 1] == b'_' || b[i - 1] == b'$')
}
