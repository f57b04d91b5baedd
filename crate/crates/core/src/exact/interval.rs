//! Closed intervals with rational endpoints.
//!
//! Every operation returns an interval containing the exact image of its
//! operands. Endpoints stay exact unless a caller asks for outward rounding
//! onto a dyadic grid, which is how long computations keep their
//! denominators bounded.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::rational::{ArithOp, Rational};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo > hi {
            return Err(Error::Validation(format!("interval endpoints out of order: [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    /// Builds `[min(a,b), max(a,b)]`.
    pub fn hull_of(a: Rational, b: Rational) -> Self {
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn point(x: Rational) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    /// `[center - radius, center + radius]`.
    pub fn ball(center: &Rational, radius: &Rational) -> Self {
        let r = radius.abs();
        Interval { lo: center - &r, hi: center + &r }
    }

    pub fn zero() -> Self {
        Interval::point(Rational::zero())
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn into_bounds(self) -> (Rational, Rational) {
        (self.lo, self.hi)
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> Rational {
        (&self.lo + &self.hi).shl(-1)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.lo.signum() <= 0 && self.hi.signum() >= 0
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// Strictly positive on the whole interval.
    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.clone().max(other.lo.clone());
        let hi = self.hi.clone().min(other.hi.clone());
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval { lo: self.lo.clone().min(other.lo.clone()), hi: self.hi.clone().max(other.hi.clone()) }
    }

    /// Outward rounding of both endpoints onto `2^-bits Z`.
    pub fn round_out(&self, bits: u32) -> Interval {
        Interval { lo: self.lo.dyadic_floor(bits), hi: self.hi.dyadic_ceil(bits) }
    }

    pub fn scale(&self, c: &Rational) -> Interval {
        Interval::hull_of(&self.lo * c, &self.hi * c)
    }

    pub fn abs(&self) -> Interval {
        if self.lo.signum() >= 0 {
            self.clone()
        } else if self.hi.signum() <= 0 {
            -self
        } else {
            Interval { lo: Rational::zero(), hi: self.hi.clone().max(-&self.lo) }
        }
    }

    /// Square with the dependency on a single operand taken into account.
    pub fn sqr(&self) -> Interval {
        let a = self.abs();
        Interval { lo: &a.lo * &a.lo, hi: &a.hi * &a.hi }
    }

    pub fn recip(&self) -> Result<Interval> {
        if self.contains_zero() {
            return Err(Error::ZeroInDivisor(self.to_string()));
        }
        Ok(Interval { lo: self.hi.recip()?, hi: self.lo.recip()? })
    }

    pub fn checked_div(&self, rhs: &Interval) -> Result<Interval> {
        Ok(self * &rhs.recip()?)
    }

    pub fn max_abs(&self) -> Rational {
        self.lo.abs().max(self.hi.abs())
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}]", self.lo, self.hi)
    }
}

impl Add<&Interval> for &Interval {
    type Output = Interval;
    fn add(self, rhs: &Interval) -> Interval {
        Interval { lo: &self.lo + &rhs.lo, hi: &self.hi + &rhs.hi }
    }
}

impl Sub<&Interval> for &Interval {
    type Output = Interval;
    fn sub(self, rhs: &Interval) -> Interval {
        Interval { lo: &self.lo - &rhs.hi, hi: &self.hi - &rhs.lo }
    }
}

impl Mul<&Interval> for &Interval {
    type Output = Interval;
    fn mul(self, rhs: &Interval) -> Interval {
        // Sign-class shortcuts keep the common nonnegative case to two products.
        if self.lo.signum() >= 0 && rhs.lo.signum() >= 0 {
            return Interval { lo: &self.lo * &rhs.lo, hi: &self.hi * &rhs.hi };
        }
        let products = [&self.lo * &rhs.lo, &self.lo * &rhs.hi, &self.hi * &rhs.lo, &self.hi * &rhs.hi];
        let mut lo = products[0].clone();
        let mut hi = products[0].clone();
        for p in &products[1..] {
            if p < &lo {
                lo = p.clone();
            }
            if p > &hi {
                hi = p.clone();
            }
        }
        Interval { lo, hi }
    }
}

macro_rules! owned_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<Interval> for Interval {
            type Output = Interval;
            fn $method(self, rhs: Interval) -> Interval {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&Interval> for Interval {
            type Output = Interval;
            fn $method(self, rhs: &Interval) -> Interval {
                (&self).$method(rhs)
            }
        }
        impl $tr<Interval> for &Interval {
            type Output = Interval;
            fn $method(self, rhs: Interval) -> Interval {
                self.$method(&rhs)
            }
        }
    };
}

owned_binop!(Add, add);
owned_binop!(Sub, sub);
owned_binop!(Mul, mul);

impl Neg for &Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: -&self.hi, hi: -&self.lo }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        -&self
    }
}

impl std::iter::Sum for Interval {
    fn sum<I: Iterator<Item = Interval>>(iter: I) -> Interval {
        iter.fold(Interval::zero(), |a, b| &a + &b)
    }
}

pub fn interval_arith(a: &Interval, b: &Interval, op: ArithOp) -> Result<Interval> {
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

    fn iv(lo: i64, hi: i64) -> Interval {
        Interval::new(Rational::from(lo), Rational::from(hi)).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(interval_arith(&iv(1, 2), &iv(3, 4), ArithOp::Add).unwrap(), iv(4, 6));
        assert_eq!(interval_arith(&iv(-1, 1), &iv(-1, 1), ArithOp::Mul).unwrap(), iv(-1, 1));
        assert_eq!(interval_arith(&iv(1, 2), &iv(1, 2), ArithOp::Sub).unwrap(), iv(-1, 1));
        assert!(matches!(interval_arith(&iv(1, 2), &iv(-1, 1), ArithOp::Div), Err(Error::ZeroInDivisor(_))));
        assert!(Interval::new(Rational::one(), Rational::zero()).is_err());
        let q = interval_arith(&iv(1, 2), &iv(2, 4), ArithOp::Div).unwrap();
        assert_eq!(q, Interval::new(Rational::frac(1, 4), Rational::one()).unwrap());
    }

    #[test]
    fn rounding_is_outward() {
        let x = Interval::point(Rational::frac(1, 3));
        let r = x.round_out(8);
        assert!(r.contains(&Rational::frac(1, 3)));
        assert!(r.width() <= Rational::pow2(-8));
        assert_eq!(iv(-2, 3).sqr(), iv(0, 9));
    }

    #[derive(Debug, Clone)]
    enum Expr {
        Leaf(usize),
        Add(Box<Expr>, Box<Expr>),
        Sub(Box<Expr>, Box<Expr>),
        Mul(Box<Expr>, Box<Expr>),
        Div(Box<Expr>, Box<Expr>),
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = (0usize..3).prop_map(Expr::Leaf);
        leaf.prop_recursive(4, 16, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
                (inner.clone(), inner).prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
            ]
        })
    }

    fn eval_exact(e: &Expr, xs: &[Rational]) -> Option<Rational> {
        Some(match e {
            Expr::Leaf(i) => xs[*i].clone(),
            Expr::Add(a, b) => eval_exact(a, xs)? + eval_exact(b, xs)?,
            Expr::Sub(a, b) => eval_exact(a, xs)? - eval_exact(b, xs)?,
            Expr::Mul(a, b) => eval_exact(a, xs)? * eval_exact(b, xs)?,
            Expr::Div(a, b) => eval_exact(a, xs)?.checked_div(&eval_exact(b, xs)?).ok()?,
        })
    }

    fn eval_interval(e: &Expr, xs: &[Interval]) -> Option<Interval> {
        Some(match e {
            Expr::Leaf(i) => xs[*i].clone(),
            Expr::Add(a, b) => eval_interval(a, xs)? + eval_interval(b, xs)?,
            Expr::Sub(a, b) => eval_interval(a, xs)? - eval_interval(b, xs)?,
            Expr::Mul(a, b) => eval_interval(a, xs)? * eval_interval(b, xs)?,
            Expr::Div(a, b) => eval_interval(a, xs)?.checked_div(&eval_interval(b, xs)?).ok()?.round_out(40),
        })
    }

    proptest! {
        #[test]
        fn containment(
            e in arb_expr(),
            pts in proptest::collection::vec((-50i64..50, 1i64..20, 0i64..30), 3)
        ) {
            let xs: Vec<Rational> = pts.iter().map(|(n, d, _)| Rational::frac(*n, *d)).collect();
            let ivs: Vec<Interval> = pts
                .iter()
                .zip(&xs)
                .map(|((_, _, w), x)| Interval::new(x - Rational::frac(*w, 64), x + Rational::frac(*w, 97)).unwrap())
                .collect();
            if let Some(enc) = eval_interval(&e, &ivs) {
                if let Some(v) = eval_exact(&e, &xs) {
                    prop_assert!(enc.contains(&v), "{v} not in {enc}");
                }
            }
        }
    }
}
