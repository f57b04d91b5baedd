//! The bump `g`, its log-moment `Psi` and the inverse `Phi`.
//!
//! `cargo run --example bump_psi_phi`

use delta2_capacity::constructions::{eval_g, integral_g, moment_enclosure, phi_interval, psi_point};
use delta2_capacity::Rational;

fn main() -> delta2_capacity::Result<()> {
    println!("int g = {}", integral_g());
    for a in ["0", "1/2", "2", "7/2", "4"] {
        let a: Rational = a.parse()?;
        println!("g({a}) = {}", eval_g(&a));
    }
    // Psi(u) = int log2(a^2) g(a - u); M(n) is its value at integers, n >= 1
    for n in 1..=5u64 {
        let m = moment_enclosure(n, 40)?;
        println!("M({n}) in [{}, {}]", m.lo().to_decimal(12), m.hi().to_decimal(12));
    }
    // Phi inverts Psi
    let u = Rational::frac(37, 8);
    let z = psi_point(&u, 48)?;
    let back = phi_interval(&z, 30)?;
    println!(
        "Psi({u}) = {}; Phi of that in [{}, {}]",
        z.mid().to_decimal(12),
        back.lo().to_decimal(12),
        back.hi().to_decimal(12)
    );
    Ok(())
}
