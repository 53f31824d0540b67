//! Rewrites a file for two environments and prints the results.
//!
//! `cargo run --example sanitize_source`

use envsan::{sanitize_source, Browser, Environment, Os, SanitizeOptions, Version};

const SOURCE: &str = "/**\n  * @skipOnNodeVersion 20,22\n  */\nit('should return a valid Provider Component', () => {});\n\n/**\n  * @skipOnOS win32\n  */\nit.only('should output the correct snippet ids', () => {});\n";

fn main() {
    let envs = [
        Environment::new(Os::Linux, Version::new(18, 20, 8), Browser::Chrome),
        Environment::new(Os::Win32, Version::new(22, 15, 0), Browser::Firefox),
    ];
    for env in envs {
        let out = sanitize_source(SOURCE.as_bytes(), "snippets.test.js", &env, &SanitizeOptions::default()).unwrap();
        println!("== {env}: {} edit(s), changed: {}", out.edits.len(), out.changed());
        print!("{}", out.transformed_text());
        for r in &out.records {
            println!("-- line {}: {}", r.line, r.reason_summary);
        }
    }
}
