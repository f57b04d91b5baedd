//! Canonical arbitrary-precision rationals.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An exact rational number, always stored in lowest terms with a positive
/// denominator, so structural equality is numeric equality.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let den = den.into();
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(BigRational::new(num.into(), den)))
    }

    /// Panicking constructor for literals whose denominator is known to be nonzero.
    pub fn frac(num: i64, den: i64) -> Self {
        Self::new(num, den).expect("literal denominator must be nonzero")
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    /// `2^k` for any integer exponent.
    pub fn pow2(k: i64) -> Self {
        let mag = BigInt::one() << k.unsigned_abs();
        if k >= 0 {
            Rational::from_int(mag)
        } else {
            Rational(BigRational::new_raw(BigInt::one(), mag))
        }
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Self> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Rational(&self.0 / &rhs.0))
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn pow(&self, e: u32) -> Self {
        Rational(num_traits::pow::Pow::pow(&self.0, e))
    }

    /// Multiply by `2^k` exactly. Only powers of two can cancel, so lowest
    /// terms are restored by shifting rather than by a gcd.
    pub fn shl(&self, k: i64) -> Self {
        if k == 0 || self.is_zero() {
            return self.clone();
        }
        let (n, d) = (self.numer(), self.denom());
        let (n, d) = if k > 0 {
            let k = k as u64;
            let tz = d.trailing_zeros().unwrap_or(0).min(k);
            (n << (k - tz), d >> tz)
        } else {
            let k = k.unsigned_abs();
            let tz = n.trailing_zeros().unwrap_or(0).min(k);
            (n >> tz, d << (k - tz))
        };
        Rational(BigRational::new_raw(n, d))
    }

    /// `m / 2^n` in lowest terms.
    fn from_dyadic(m: BigInt, n: u32) -> Self {
        Rational(BigRational::new_raw(m, BigInt::one())).shl(-(n as i64))
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn to_f64(&self) -> f64 {
        // BigRational::to_f64 handles huge components without overflow.
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Exact conversion of a finite `f64`.
    pub fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Rational)
    }

    /// The integer `k` with `2^k <= |self| < 2^(k+1)`; `None` for zero.
    pub fn floor_log2(&self) -> Option<i64> {
        if self.is_zero() {
            return None;
        }
        let n = self.numer().magnitude();
        let d = self.denom().magnitude();
        let mut k = n.bits() as i64 - d.bits() as i64;
        // 2^k <= n/d holds iff n >= d * 2^k
        let ge = |k: i64| -> bool {
            if k >= 0 {
                n >= &(d << k as u64)
            } else {
                &(n << k.unsigned_abs()) >= d
            }
        };
        if !ge(k) {
            k -= 1;
        }
        debug_assert!(ge(k) && !ge(k + 1));
        Some(k)
    }

    /// Nearest point of the grid `2^-n Z`, ties to the even numerator.
    /// The error is at most `2^-(n+1)`.
    pub fn dyadic_round(&self, n: u32) -> Rational {
        let scaled = self.shl(n as i64);
        let floor = scaled.floor();
        let frac = &scaled - &Rational::from_int(floor.clone());
        let half = Rational::frac(1, 2);
        let m = match frac.cmp(&half) {
            Ordering::Less => floor,
            Ordering::Greater => floor + 1,
            Ordering::Equal => {
                if floor.is_even() {
                    floor
                } else {
                    floor + 1
                }
            }
        };
        Rational::from_int(m).shl(-(n as i64))
    }

    /// Largest point of `2^-n Z` not above `self`.
    pub fn dyadic_floor(&self, n: u32) -> Rational {
        if self.on_grid(n) {
            return self.clone();
        }
        Rational::from_dyadic((self.numer() << n as u64).div_floor(self.denom()), n)
    }

    /// Smallest point of `2^-n Z` not below `self`.
    pub fn dyadic_ceil(&self, n: u32) -> Rational {
        if self.on_grid(n) {
            return self.clone();
        }
        Rational::from_dyadic((self.numer() << n as u64).div_ceil(self.denom()), n)
    }

    /// Whether `self` lies on `2^-n Z`.
    fn on_grid(&self, n: u32) -> bool {
        let d = self.denom();
        d.bits() <= n as u64 + 1 && d.trailing_zeros().unwrap_or(0) + 1 == d.bits()
    }

    /// Fixed-point decimal rendering, truncated toward zero, with `digits` fractional digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scale = BigInt::from(10u32).pow(digits as u32);
        let scaled = (self.numer().abs() * &scale) / self.denom();
        let s = scaled.to_string();
        let s = if s.len() <= digits { format!("{}{}", "0".repeat(digits + 1 - s.len()), s) } else { s };
        let (int, frac) = s.split_at(s.len() - digits);
        let sign = if self.is_negative() && !scaled.is_zero() { "-" } else { "" };
        if digits == 0 {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    }

    pub fn signum(&self) -> i32 {
        match self.numer().sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `num/den`, integers, and plain decimals such as `0.125`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("not a rational: {s:?}"));
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            return Rational::new(n, d);
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let neg = int.starts_with('-');
            let int: BigInt =
                if int.is_empty() || int == "-" { BigInt::zero() } else { int.parse().map_err(|_| bad())? };
            let frac_val: BigInt = frac.parse().map_err(|_| bad())?;
            let scale = BigInt::from(10u32).pow(frac.len() as u32);
            let mag = Rational::from_int(int.abs()) + Rational::new(frac_val, scale).map_err(|_| bad())?;
            return Ok(if neg { -mag } else { mag });
        }
        let n: BigInt = s.parse().map_err(|_| bad())?;
        Ok(Rational::from_int(n))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_int(n)
    }
}

impl From<u64> for Rational {
    fn from(n: u64) -> Self {
        Rational::from_int(n)
    }
}

/// Power-of-two exponent of a denominator, if it is one.
fn dyadic_exp(d: &BigInt) -> Option<u64> {
    let tz = d.trailing_zeros().unwrap_or(0);
    (tz + 1 == d.bits()).then_some(tz)
}

/// `m / 2^e` in lowest terms.
fn dyadic(m: BigInt, e: u64) -> Rational {
    if m.is_zero() {
        return Rational::zero();
    }
    let tz = m.trailing_zeros().unwrap_or(0).min(e);
    Rational(BigRational::new_raw(m >> tz, BigInt::one() << (e - tz)))
}

// Dyadic operands dominate interval work; they skip the gcd entirely.
fn add_core(a: &Rational, b: &Rational) -> Rational {
    if let (Some(ea), Some(eb)) = (dyadic_exp(a.denom()), dyadic_exp(b.denom())) {
        let e = ea.max(eb);
        return dyadic((a.numer() << (e - ea)) + (b.numer() << (e - eb)), e);
    }
    Rational(&a.0 + &b.0)
}

fn sub_core(a: &Rational, b: &Rational) -> Rational {
    if let (Some(ea), Some(eb)) = (dyadic_exp(a.denom()), dyadic_exp(b.denom())) {
        let e = ea.max(eb);
        return dyadic((a.numer() << (e - ea)) - (b.numer() << (e - eb)), e);
    }
    Rational(&a.0 - &b.0)
}

fn mul_core(a: &Rational, b: &Rational) -> Rational {
    if let (Some(ea), Some(eb)) = (dyadic_exp(a.denom()), dyadic_exp(b.denom())) {
        return dyadic(a.numer() * b.numer(), ea + eb);
    }
    Rational(&a.0 * &b.0)
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $core:ident) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                $core(self, rhs)
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                $core(&self, &rhs)
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                $core(&self, rhs)
            }
        }
        impl $tr<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                $core(self, &rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_core);
forward_binop!(Sub, sub, sub_core);
forward_binop!(Mul, mul, mul_core);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |a, b| a + b)
    }
}

/// Binary operation selector for [`rat_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn rat_arith(a: &Rational, b: &Rational, op: ArithOp) -> Result<Rational> {
    Ok(match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
        ArithOp::Div => a.checked_div(b)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    #[test]
    fn examples() {
        assert_eq!(rat_arith(&r(1, 3), &r(1, 6), ArithOp::Add).unwrap(), r(1, 2));
        let half = r(2, 4);
        assert_eq!(half.numer(), &BigInt::from(1));
        assert_eq!(half.denom(), &BigInt::from(2));
        let x = r(355, 113);
        let z = rat_arith(&x, &x, ArithOp::Sub).unwrap();
        assert_eq!(z.to_string(), "0/1");
        assert_eq!(rat_arith(&x, &Rational::zero(), ArithOp::Div), Err(Error::DivisionByZero));
        assert_eq!(Rational::new(1, 0), Err(Error::DivisionByZero));
        assert_eq!(r(3, -6).to_string(), "-1/2");
    }

    #[test]
    fn dyadic_round_examples() {
        let q = r(1, 3).dyadic_round(2);
        assert!(q == r(1, 4) || q == r(2, 4));
        assert_eq!(r(5, 2).dyadic_round(1), r(5, 2));
        let q = r(1, 3).dyadic_round(10);
        assert!((&q - &r(1, 3)).abs() <= Rational::pow2(-10));
        // ties go to the even numerator: 3/8 at n=2 sits between 1/4 and 2/4
        assert_eq!(r(3, 8).dyadic_round(2), r(2, 4));
        assert_eq!(r(1, 8).dyadic_round(2), Rational::zero());
        assert_eq!(r(-3, 8).dyadic_round(2), r(-2, 4));
    }

    #[test]
    fn floor_log2_and_parse() {
        assert_eq!(r(1, 1).floor_log2(), Some(0));
        assert_eq!(r(3, 1).floor_log2(), Some(1));
        assert_eq!(r(1, 3).floor_log2(), Some(-2));
        assert_eq!(r(1, 4).floor_log2(), Some(-2));
        assert_eq!(Rational::zero().floor_log2(), None);
        assert_eq!("7/21".parse::<Rational>().unwrap(), r(1, 3));
        assert_eq!("-0.125".parse::<Rational>().unwrap(), r(-1, 8));
        assert_eq!("12".parse::<Rational>().unwrap(), r(12, 1));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("abc".parse::<Rational>().is_err());
        assert_eq!(r(-1, 3).to_decimal(4), "-0.3333");
        assert_eq!(r(5, 2).to_decimal(2), "2.50");
    }

    fn arb_rat() -> impl Strategy<Value = Rational> {
        (-1000i64..1000, 1i64..500).prop_map(|(n, d)| Rational::frac(n, d))
    }

    proptest! {
        #[test]
        fn field_identities(a in arb_rat(), b in arb_rat(), c in arb_rat()) {
            prop_assert_eq!((&a + &b) + &c, &a + (&b + &c));
            prop_assert_eq!((&a * &b) * &c, &a * (&b * &c));
            prop_assert_eq!(&a * (&b + &c), &a * &b + &a * &c);
            if !b.is_zero() {
                prop_assert_eq!(a.checked_div(&b).unwrap() * &b, a.clone());
            }
        }

        #[test]
        fn dyadic_round_bound(a in arb_rat(), n in 0u32..40) {
            let q = a.dyadic_round(n);
            prop_assert!((&q - &a).abs() <= Rational::pow2(-(n as i64) - 1));
            prop_assert!((q.shl(n as i64)).is_integer());
        }

        #[test]
        fn display_parse_roundtrip(a in arb_rat()) {
            prop_assert_eq!(a.to_string().parse::<Rational>().unwrap(), a);
        }
    }
}
