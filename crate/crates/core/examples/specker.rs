//! Specker numbers and the arithmetical-hierarchy certificates behind them.
//!
//! `cargo run --example specker`

use delta2_capacity::fixtures;
use delta2_capacity::hierarchy::{delta2_anytime, Delta2Cert, Pi1Cert, REEnumerator, SpeckerNumber};

fn main() -> delta2_capacity::Result<()> {
    // dovetailed two-counter machines: phi(l) is the index of the l-th halt
    let e = REEnumerator::dovetail_tm();
    println!("{}: first halts {:?}", e.label(), e.prefix(10)?);
    let s = SpeckerNumber::new(e);
    for k in [1, 10, 100] {
        println!("partial sum at {k}: {}", s.partial(k)?.to_decimal(20));
    }

    // every certificate checks its own monotonicity and bound
    let x1 = fixtures::geo_shifted();
    x1.check(256).map_err(|v| delta2_capacity::Error::Validation(v.to_string()))?;
    let neg = Pi1Cert::negated(&x1);
    println!("{} checks to 256: {}", neg.label(), neg.check(256).is_ok());

    // a Δ₂ real as a difference of two Σ₁ reals
    let d = Delta2Cert::new(fixtures::geo_shifted(), fixtures::geo_quarter());
    for k in [1, 4, 16] {
        println!("geo-1 - geo-2 at k={k}: {}", delta2_anytime(&d, k));
    }
    Ok(())
}
