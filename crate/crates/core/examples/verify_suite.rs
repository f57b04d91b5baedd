//! Runs the verification suites from the library, the same checks `delta2 verify` runs.
//!
//! `cargo run --release --example verify_suite -- [suite...]`

use delta2_capacity::verify::{run_suite, Suite, VerifyOptions};

fn main() -> delta2_capacity::Result<()> {
    let only = std::env::args().skip(1).map(|a| a.parse::<Suite>()).collect::<Result<Vec<_>, _>>()?;
    let opts = VerifyOptions { only, ..Default::default() };
    let report = run_suite(&opts, |r| println!("{r}"));
    println!("{} passed, {} failed", report.passed, report.failed);
    std::process::exit(if report.all_passed() { 0 } else { 1 })
}
