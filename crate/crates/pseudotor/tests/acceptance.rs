//! Acceptance suite: every criterion at its stated tolerance with the default
//! configuration, one PASS/FAIL line each. Exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use pseudotor::checks::{run_criterion, CRITERIA};
use pseudotor::{Context, RunConfig};

fn main() -> ExitCode {
    let ctx = Context::new(RunConfig::default()).expect("default configuration is valid");
    let mut failed = Vec::new();
    println!("running {} acceptance criteria", CRITERIA.len());
    for (i, name) in CRITERIA.iter().enumerate() {
        let t = Instant::now();
        let c = run_criterion(&ctx, i);
        println!("[{:>2}] {} ({:.1}s)", i + 1, c.summary_line(), t.elapsed().as_secs_f64());
        if !c.passed {
            failed.push(*name);
        }
    }
    if failed.is_empty() {
        println!("acceptance: {} of {} criteria passed", CRITERIA.len(), CRITERIA.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
