//! Exact rational arithmetic, outward-rounded intervals and certified
//! elementary-function enclosures.

mod elementary;
mod interval;
mod rational;

pub use elementary::{exp2_enclosure, inv_ln2_enclosure, ln2_enclosure, ln_enclosure, log2_enclosure, log2_interval};
pub use interval::{interval_arith, Interval};
pub use rational::{rat_arith, ArithOp, Rational};

/// Alias kept for callers that think of rounding as a free function.
pub fn dyadic_round(x: &Rational, n: u32) -> Rational {
    x.dyadic_round(n)
}
