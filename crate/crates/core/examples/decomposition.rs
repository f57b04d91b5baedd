//! Splitting the secrecy capacity into a log-moment difference and a correction.
//!
//! `cargo run --example decomposition`

use delta2_capacity::capacity::theorem1_check;
use delta2_capacity::{fixtures, Rational};

fn main() -> delta2_capacity::Result<()> {
    let one = Rational::one();
    let r = theorem1_check(&fixtures::geo_shifted(), &fixtures::geo_quarter(), &one, &one, &one, 16)?;
    println!("capacity estimate  {}", r.capacity_estimate.to_decimal(10));
    println!("x (log-moments)    {}", r.x_estimate.to_decimal(10));
    println!("u = z1 - z2        {}", r.u_independent.to_decimal(10));
    if let Some(x) = &r.x_limit {
        println!("x limit            {x}");
    }
    println!("residual {} within combined width {}: {}", r.residual.to_f64(), r.combined_error.to_f64(), r.passed);
    Ok(())
}
