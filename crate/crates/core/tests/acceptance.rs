//! Acceptance gate: one PASS/FAIL line per criterion, each with its runtime limit.
//! A criterion passes only if its property holds and it finishes within the limit.

use std::process::ExitCode;

use delta2_capacity::verify::{checks, run_check, VerifyOptions};

fn main() -> ExitCode {
    let opts = VerifyOptions::default();
    let mut failed = 0;
    let criteria: Vec<_> = checks().into_iter().filter(|c| c.id.starts_with('c')).collect();
    println!("running {} acceptance criteria", criteria.len());
    for c in &criteria {
        let r = run_check(c, &opts);
        println!("{r}");
        failed += usize::from(!r.passed);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
