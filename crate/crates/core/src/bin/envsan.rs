use std::io;
use std::process::ExitCode;

use chrono::{DateTime, Utc};
use envsan::cli::{run_from_args, Context};
use envsan::environment::SystemProbe;
use envsan::report::Clock;

fn main() -> ExitCode {
    // Pins record timestamps, for reproducible reports.
    let clock = match std::env::var("ENVSAN_FIXED_TIME") {
        Ok(t) => match DateTime::parse_from_rfc3339(&t) {
            Ok(t) => Clock::Fixed(t.with_timezone(&Utc)),
            Err(e) => {
                eprintln!("error: ENVSAN_FIXED_TIME: {e}");
                return ExitCode::from(1);
            }
        },
        Err(_) => Clock::System,
    };
    let cwd = match std::env::current_dir() {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut stdout = io::stdout().lock();
    let mut stderr = io::stderr().lock();
    let mut ctx = Context {
        cwd,
        probe: &SystemProbe,
        clock,
        stdout: &mut stdout,
        stderr: &mut stderr,
    };
    let code = run_from_args(std::env::args_os(), &mut ctx);
    ExitCode::from(code as u8)
}
