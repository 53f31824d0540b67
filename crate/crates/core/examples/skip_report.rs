//! Builds, renders and merges skip reports.
//!
//! `cargo run --example skip_report`

use chrono::{TimeZone, Utc};
use envsan::report::{merge_reports, render_json, render_text, Clock, ScanStats};
use envsan::{build_report, sanitize_source, Browser, Environment, Os, SanitizeOptions, Version};

const SOURCE: &str = "/** @skipOnOs darwin */\ntest('uses inotify', () => {});\n\n/** @skipOnBrowser safari */\ntest('drag and drop', () => {});\n";

fn report_for(env: Environment) -> envsan::Report {
    let options = SanitizeOptions {
        clock: Clock::Fixed(Utc.with_ymd_and_hms(2025, 5, 1, 12, 0, 0).unwrap()),
        ..Default::default()
    };
    let out = sanitize_source(SOURCE.as_bytes(), "watch.test.js", &env, &options).unwrap();
    let scan = ScanStats {
        files: 1,
        test_blocks: out.test_blocks,
        ..Default::default()
    };
    build_report(out.records, &env).with_scan(scan, out.diagnostics)
}

fn main() {
    let mac = report_for(Environment::new(Os::Darwin, Version::new(20, 19, 1), Browser::Safari));
    print!("{}", render_text(&mac));
    println!();
    print!("{}", render_json(&mac));

    let linux = report_for(Environment::new(Os::Linux, Version::new(20, 19, 1), Browser::Chrome));
    let merged = merge_reports(vec![mac, linux]).unwrap();
    println!("merged: {} record(s)", merged.summary.total);
}
