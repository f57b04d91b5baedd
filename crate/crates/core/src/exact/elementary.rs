//! Certified enclosures of `ln 2`, `log2` and `exp2`.
//!
//! `log2(x)` reduces `x = 2^k m` with `m` in `[1, 2)` and sums
//! `ln m = 2 atanh((m-1)/(m+1))`, whose tail after `N` terms is bounded by
//! `2 z^(2N+1) / ((2N+1)(1 - z^2))`. `exp2` uses the Taylor series of `e^y`
//! on `y = (x - floor x) ln 2` with the usual geometric remainder bound.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::interval::Interval;
use super::rational::Rational;
use crate::error::{Error, Result};

const LN2_CACHE_BITS: u32 = 640;

/// `ln m` for rational `m` in `[1, 2]`, width at most about `2^-bits`.
///
/// Runs in fixed point with scale `2^w`: a lower sequence built from floors
/// and an upper one from ceilings bracket every partial sum, so no rational
/// normalisation is needed inside the loop.
fn ln_mantissa(m: &Rational, bits: u32) -> Interval {
    debug_assert!(m >= &Rational::one() && m <= &Rational::from(2i64));
    if *m == Rational::one() {
        return Interval::zero();
    }
    let w = (bits + 24) as usize;
    let (p, q) = (m.numer().clone(), m.denom().clone());
    // z = (p - q)/(p + q) in [z_lo, z_lo + 1] ulps
    let z_lo: BigInt = ((&p - &q) << w).div_floor(&(&p + &q));
    let z_hi: BigInt = &z_lo + 1;
    let z2_lo: BigInt = (&z_lo * &z_lo) >> w;
    let z2_hi: BigInt = ((&z_hi * &z_hi) >> w) + 1;
    let stop = BigInt::one() << (w - bits as usize - 4);
    let (mut pow_lo, mut pow_hi) = (z_lo, z_hi);
    let (mut sum_lo, mut sum_hi) = (BigInt::zero(), BigInt::zero());
    let mut j: u64 = 0;
    loop {
        let d = BigInt::from(2 * j + 1);
        sum_lo += pow_lo.div_floor(&d);
        sum_hi += pow_hi.div_ceil(&d);
        pow_lo = (&pow_lo * &z2_lo) >> w;
        pow_hi = ((&pow_hi * &z2_hi) >> w) + 1;
        j += 1;
        if pow_hi <= stop {
            break;
        }
    }
    // remaining terms are below pow_hi / ((2j + 1)(1 - z^2)) and z^2 <= 1/9
    let tail = (&pow_hi * 9u32).div_ceil(&BigInt::from(8 * (2 * j + 1))) + 1;
    sum_hi += tail;
    let scale = Rational::pow2(1 - w as i64);
    Interval::new(Rational::from_int(sum_lo) * &scale, Rational::from_int(sum_hi) * &scale)
        .expect("ordered")
        .round_out(bits + 16)
}

fn ln2_cached() -> &'static Interval {
    static LN2: OnceLock<Interval> = OnceLock::new();
    LN2.get_or_init(|| ln_mantissa(&Rational::from(2i64), LN2_CACHE_BITS))
}

/// Enclosure of `ln 2` with width at most `2^-bits`.
pub fn ln2_enclosure(bits: u32) -> Interval {
    if bits + 8 <= LN2_CACHE_BITS {
        ln2_cached().round_out(bits + 8)
    } else {
        ln_mantissa(&Rational::from(2i64), bits + 8)
    }
}

/// Enclosure of `1 / ln 2` with width at most `2^-bits`.
pub fn inv_ln2_enclosure(bits: u32) -> Interval {
    static INV: OnceLock<Interval> = OnceLock::new();
    if bits + 16 <= LN2_CACHE_BITS {
        let cached = INV.get_or_init(|| ln2_cached().recip().expect("ln 2 > 0").round_out(LN2_CACHE_BITS - 8));
        return cached.round_out(bits + 4);
    }
    ln2_enclosure(bits + 4).recip().expect("ln 2 > 0").round_out(bits + 4)
}

/// Interval containing `log2(x)` with width at most `2^-precision_bits`.
pub fn log2_enclosure(x: &Rational, precision_bits: u32) -> Result<Interval> {
    if !x.is_positive() {
        return Err(Error::Domain(format!("log2 of non-positive {x}")));
    }
    let k = x.floor_log2().expect("x > 0");
    let m = x.shl(-k);
    let kq = Rational::from(k);
    if m == Rational::one() {
        return Ok(Interval::point(kq));
    }
    let target = Rational::pow2(-(precision_bits as i64));
    let mut bits = precision_bits + 6;
    loop {
        let ln_m = ln_mantissa(&m, bits);
        let q = &ln_m * &inv_ln2_enclosure(bits + 4);
        let out = (&q + &Interval::point(kq.clone())).round_out(bits + 2);
        if out.width() <= target {
            return Ok(out);
        }
        bits += 8;
    }
}

/// Natural logarithm enclosure, `log2(x) * ln 2`.
pub fn ln_enclosure(x: &Rational, precision_bits: u32) -> Result<Interval> {
    let l = log2_enclosure(x, precision_bits + 2)?;
    let extra = (l.max_abs().floor().bits() + 2) as u32;
    Ok((&l * &ln2_enclosure(precision_bits + 2 + extra)).round_out(precision_bits + 4))
}

/// Interval containing `2^x` with width at most `2^-precision_bits`.
pub fn exp2_enclosure(x: &Rational, precision_bits: u32) -> Interval {
    let k = x.floor();
    let frac = x - Rational::from_int(k.clone());
    let k: i64 = k.try_into().expect("exp2 exponent out of range");
    if frac.is_zero() {
        return Interval::point(Rational::pow2(k));
    }
    let scale_bits = k.max(0) as u32;
    let target = Rational::pow2(-(precision_bits as i64));
    let mut bits = precision_bits + scale_bits + 8;
    loop {
        let work = bits + 16;
        let y = Interval::point(frac.clone()) * ln2_enclosure(work);
        let y = y.round_out(work);
        // e^y = sum y^j / j!; all terms positive since y > 0.
        let mut term = Interval::point(Rational::one());
        let mut sum = Interval::zero();
        let mut j: u64 = 0;
        let tail_target = Rational::pow2(-(bits as i64) - 2);
        let e = loop {
            sum = (&sum + &term).round_out(work);
            j += 1;
            term = (&term * &y).scale(&Rational::from(j).recip().expect("j > 0")).round_out(work);
            // remaining terms are bounded by term / (1 - y/(j+1))
            let ratio = y.hi().checked_div(&Rational::from(j + 1)).expect("j+1 > 0");
            let tail = term.hi().checked_div(&(Rational::one() - ratio)).expect("y < 1 < j+1");
            if tail <= tail_target {
                break Interval::new(sum.lo().clone(), sum.hi() + &tail).expect("ordered");
            }
        };
        let out = e.scale(&Rational::pow2(k)).round_out(bits + 2);
        if out.width() <= target {
            return out;
        }
        bits += 8;
    }
}

/// `log2` over an interval of positive reals.
pub fn log2_interval(x: &Interval, precision_bits: u32) -> Result<Interval> {
    if !x.is_positive() {
        return Err(Error::Domain(format!("log2 over interval {x} reaching non-positive values")));
    }
    if x.is_point() {
        return log2_enclosure(x.lo(), precision_bits);
    }
    let lo = log2_enclosure(x.lo(), precision_bits)?;
    let hi = log2_enclosure(x.hi(), precision_bits)?;
    Interval::new(lo.lo().clone(), hi.hi().clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    #[test]
    fn exact_powers() {
        let e = log2_enclosure(&q(2, 1), 30).unwrap();
        assert!(e.contains(&Rational::one()));
        assert!(e.width() <= Rational::pow2(-30));
        let e = log2_enclosure(&q(1, 1), 30).unwrap();
        assert!(e.contains(&Rational::zero()));
        let e = log2_enclosure(&q(1, 8), 10).unwrap();
        assert!(e.contains(&Rational::from(-3i64)));
    }

    #[test]
    fn log2_of_three() {
        let e = log2_enclosure(&q(3, 1), 20).unwrap();
        let box_ = Interval::new(q(1_584_962, 1_000_000), q(1_584_963, 1_000_000)).unwrap();
        assert!(box_.contains_interval(&e), "{e:?}");
        assert!(e.width() <= Rational::pow2(-20));
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(log2_enclosure(&Rational::zero(), 8), Err(Error::Domain(_))));
        assert!(matches!(log2_enclosure(&q(-1, 2), 8), Err(Error::Domain(_))));
    }

    #[test]
    fn width_halves_with_precision() {
        for x in [q(3, 1), q(7, 5), q(1000, 3), q(1, 7)] {
            for p in 4..40 {
                let w = log2_enclosure(&x, p).unwrap().width();
                assert!(w <= Rational::pow2(-(p as i64)));
            }
        }
    }

    #[test]
    fn exp2_basics() {
        let e = exp2_enclosure(&q(3, 1), 20);
        assert_eq!(e, Interval::point(Rational::from(8i64)));
        let e = exp2_enclosure(&q(1, 2), 40);
        // sqrt(2) = 1.41421356237309504880...
        assert!(e.width() <= Rational::pow2(-40));
        let s = &e * &e;
        assert!(s.contains(&Rational::from(2i64)));
        let e = exp2_enclosure(&q(-7, 3), 30);
        let l = log2_interval(&e, 30).unwrap();
        assert!(l.contains(&q(-7, 3)));
    }

    #[test]
    fn ln2_digits() {
        let e = ln2_enclosure(60);
        assert!(e.width() <= Rational::pow2(-60));
        assert!(e.lo() > &"0.69314718055994530".parse().unwrap());
        assert!(e.hi() < &"0.69314718055994531".parse().unwrap());
    }
}
