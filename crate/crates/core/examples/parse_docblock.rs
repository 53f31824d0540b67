//! Classifies the tags of a docblock.
//!
//! `cargo run --example parse_docblock`

use envsan::{parse_docblock, ParseMode, SourceLocation};

fn main() {
    let text = "/**\n * Resolves symlinks.\n * @skipOnOS Windows-Latest\n * @enableOnNodeRange >=18 <21 || 22\n * @enableOnNodeVersion 20, 22\n * @author someone\n * @skipOnBrowser\n */";
    let location = SourceLocation::new("fs.test.js", 10);

    let doc = parse_docblock(text, &location, ParseMode::Lenient).expect("lenient parsing never fails");
    for a in &doc.annotations {
        println!("{:<22} {:?}", a.tag_name(), a.values);
    }
    println!("unknown tags: {:?}", doc.unknown_tags);
    for d in &doc.diagnostics {
        println!("{d}");
    }

    match parse_docblock(text, &location, ParseMode::Strict) {
        Ok(_) => println!("strict: ok"),
        Err(e) => println!("strict: {e}"),
    }
}
