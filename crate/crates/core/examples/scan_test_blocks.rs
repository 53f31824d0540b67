//! Locates test blocks and their docblocks without being fooled by strings,
//! templates, comments or regexes.
//!
//! `cargo run --example scan_test_blocks`

use std::path::Path;

use envsan::{scan_source, ParseMode};

const SOURCE: &str = r#"const hint = `call it('like this') ${name}`;
const re = /describe\(/g; // test('not real')

/**
 * @skipOnOs win32
 */
describe('paths', () => {
  /** @enableOnNodeRange >=20 */
  it.only('normalizes', () => {});

  test.each([[1], [2]])('handles %i', (n) => {});
});
"#;

fn main() {
    let scanned = scan_source(SOURCE, Path::new("paths.test.js"), ParseMode::Lenient).unwrap();
    println!("{} tokens", scanned.tokens.len());
    for b in &scanned.blocks {
        let tags: Vec<String> = b
            .docblock
            .iter()
            .flat_map(|d| d.annotations.iter().map(|a| a.to_string()))
            .collect();
        println!(
            "{:>2}:{:<2} {}{:<8} {:?} depth={} modifier={:?} tags={tags:?}",
            b.line,
            b.column,
            "  ".repeat(b.depth),
            b.callee,
            b.name.as_deref().unwrap_or("?"),
            b.depth,
            b.modifier,
        );
    }
}
