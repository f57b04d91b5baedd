//! How fast `x_m` approaches its limit for the star density.
//!
//! `cargo run --example lemma2_table`

use delta2_capacity::capacity::lemma2_table;
use delta2_capacity::constructions::{build_star_pdf, StarOptions};
use delta2_capacity::hierarchy::REEnumerator;
use delta2_capacity::quad::QuadOptions;
use delta2_capacity::Rational;

fn main() -> delta2_capacity::Result<()> {
    let star = build_star_pdf(&REEnumerator::identity(), 32, &StarOptions::default())?;
    let opts = QuadOptions { tol: Rational::pow2(-20), budget: 1 << 14 };
    let t = lemma2_table(&star, &Rational::one(), &Rational::one(), 64, &opts)?;
    println!("x* <= {}", t.limit_upper().to_decimal(10));
    // the gap to the limit stays below sigma^2 / (m P)
    for m in [4u64, 8, 16, 32, 64] {
        println!(
            "m={m:>2}: x_m~{} gap<={} rate={}",
            t.x(m).mid().to_decimal(8),
            t.gap(m).to_decimal(8),
            t.rate(m).to_decimal(8)
        );
    }
    Ok(())
}
