//! Version parsing, prefix matching and range satisfaction.
//!
//! `cargo run --example version_ranges`

use envsan::{matches_prefix, parse_range, parse_version, satisfies, VersionPrefix};

fn main() {
    let hosts = ["18.20.8", "v20.19.1", "22", "22.15.0"];
    let ranges = [">=18 <21", "20 || >=22.15", "<=22", "=22"];

    print!("{:<16}", "");
    for h in hosts {
        print!("{h:>10}");
    }
    println!();
    for text in ranges {
        let range = parse_range(text).unwrap();
        print!("{:<16}", range.to_string());
        for h in hosts {
            let v = parse_version(h).unwrap();
            print!("{:>10}", if satisfies(&v, &range) { "yes" } else { "-" });
        }
        println!();
    }

    let prefix = VersionPrefix::parse("20.19").unwrap();
    let v = parse_version("20.19.1").unwrap();
    println!("20.19.1 matches prefix {prefix}: {}", matches_prefix(&v, &prefix));

    for bad in ["^18", "~20.1", "18 - 20", "20.x", "18.0.0-rc.1"] {
        println!("{bad:<12} {}", parse_range(bad).unwrap_err());
    }
}
