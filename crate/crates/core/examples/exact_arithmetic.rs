//! Exact rationals, outward-rounded intervals and computable reals.
//!
//! `cargo run --example exact_arithmetic`

use delta2_capacity::creal::{self, creal_cmp, creal_from_rational, Comparison};
use delta2_capacity::exact::{ln2_enclosure, log2_enclosure};
use delta2_capacity::{Interval, Rational};

fn main() -> delta2_capacity::Result<()> {
    let third: Rational = "1/3".parse()?;
    let x = &third + &Rational::frac(1, 6);
    println!("1/3 + 1/6 = {x}");
    println!("1/3 to 15 digits: {}", third.to_decimal(15));

    // interval operations never lose the true value
    let a = Interval::new(Rational::frac(-1, 2), Rational::frac(3, 4))?;
    println!("[-1/2, 3/4]^2 = {}", a.sqr());
    println!("ln 2 in {}", ln2_enclosure(40));
    println!("log2 3 in {}", log2_enclosure(&Rational::from(3i64), 40)?);

    // a computable real answers every precision request n with error <= 2^-n
    let three = creal_from_rational(Rational::from(3i64));
    let l3 = creal::log2(&three, creal::DEFAULT_WITNESS_MAX)?;
    for n in [8, 32, 64] {
        println!("log2 3 at 2^-{n}: {}", l3.approx(n).to_decimal(20));
    }
    let sq = creal::exp2(&l3);
    match creal_cmp(&sq, &three, 40) {
        Comparison::IndistinguishableAt(n) => println!("2^(log2 3) and 3 agree to 2^-{n}"),
        other => println!("unexpected comparison {other:?}"),
    }
    Ok(())
}
