//! The anytime trace `(k, a_k, b_k, a_k - b_k)` of a fixture channel.
//!
//! `cargo run --example capacity_trace`

use delta2_capacity::capacity::capacity_certificate;
use delta2_capacity::fixtures;
use delta2_capacity::hierarchy::delta2_anytime;

fn main() -> delta2_capacity::Result<()> {
    let ch = fixtures::channel("pair-1")?;
    let cert = capacity_certificate(&ch);
    println!("bob kernel {}, eve kernel {}", ch.bob_kernel(), ch.eve_kernel());
    // a_k and b_k increase with the radius; their difference converges without a modulus
    for k in [1u64, 2, 4, 8, 16, 32, 64] {
        println!(
            "k={k:>2}: a={} b={} estimate={}",
            cert.a_seq.term(k).to_decimal(8),
            cert.b_seq.term(k).to_decimal(8),
            delta2_anytime(&cert.as_delta2, k).to_decimal(8)
        );
    }
    Ok(())
}
