//! Environment detection with overrides and a stand-in host.
//!
//! `cargo run --example detect_environment`

use envsan::environment::HostProbe;
use envsan::{detect_environment, EnvOverrides, SystemProbe};

struct RunnerImage;

impl HostProbe for RunnerImage {
    fn platform(&self) -> String {
        "darwin".into()
    }

    fn node_version(&self) -> Result<String, String> {
        Ok("v20.19.1\n".into())
    }

    fn env_var(&self, name: &str) -> Option<String> {
        (name == "ENVSAN_BROWSER").then(|| "Safari".into())
    }
}

fn main() {
    let probed = detect_environment(&EnvOverrides::default(), &RunnerImage).unwrap();
    println!("probed:     {probed}");

    let overrides = EnvOverrides {
        os: Some("windows-latest".into()),
        node_version: Some("22".into()),
        browser: None,
    };
    let mixed = detect_environment(&overrides, &RunnerImage).unwrap();
    println!("overridden: {mixed}");

    match detect_environment(&EnvOverrides::default(), &SystemProbe) {
        Ok(env) => println!("this host:  {env}"),
        Err(e) => println!("this host:  {e}"),
    }
}
