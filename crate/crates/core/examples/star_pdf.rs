//! The star density built from an r.e. enumerator, truncated at `T`.
//!
//! `cargo run --example star_pdf`

use delta2_capacity::constructions::{build_star_pdf, StarOptions};
use delta2_capacity::hierarchy::REEnumerator;
use delta2_capacity::Rational;

fn main() -> delta2_capacity::Result<()> {
    let e = REEnumerator::identity();
    let star = build_star_pdf(&e, 16, &StarOptions::default())?;
    println!("enumerator {} (hash {})", e.label(), &e.content_hash()[..16]);
    println!("c2 in {}", star.c2());
    println!("mass outside the truncation <= {}", star.mass_tail().to_decimal(12));
    for a in ["3/2", "2", "5", "16"] {
        let a: Rational = a.parse()?;
        let v = star.eval(&a)?;
        println!("f*({a}) in [{}, {}]", v.lo().to_decimal(10), v.hi().to_decimal(10));
    }
    println!("retained terms: {}", star.terms().len());
    Ok(())
}
