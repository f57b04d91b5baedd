//! A bump train whose log-moment equals the limit of a Σ₁ certificate.
//!
//! `cargo run --example bump_train`

use delta2_capacity::constructions::{build_bump_train, BumpTrainOptions};
use delta2_capacity::fixtures;
use delta2_capacity::Rational;

fn main() -> delta2_capacity::Result<()> {
    let x1 = fixtures::geo_shifted();
    let p = build_bump_train(&x1, 16, &BumpTrainOptions::default())?;
    println!("source {}: limit 4, z* in {}", x1.label(), p.zstar_enclosure());
    for n in 1..=5 {
        println!(
            "n={n}: d={} weight~{} alpha*~{}",
            p.d(n),
            p.weight(n).mid().to_decimal(8),
            p.alpha_star(n).mid().to_decimal(8)
        );
    }
    let mass = p.truncated_mass();
    println!(
        "retained mass in [{}, {}], dropped mass <= {}",
        mass.lo().to_decimal(12),
        mass.hi().to_decimal(12),
        p.tail_mass(16).to_decimal(12)
    );
    let lm = p.log_moment_truncated()?;
    println!(
        "int log2(a^2) f over kept bumps: {} (sum of kept d: {})",
        lm.mid().to_decimal(10),
        x1.term(16).to_decimal(10)
    );
    let v = p.eval(&Rational::from(5i64), 16);
    println!("f(5) in [{}, {}]", v.lo().to_decimal(12), v.hi().to_decimal(12));
    Ok(())
}
