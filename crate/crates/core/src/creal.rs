//! Computable reals as precision-indexed rational approximators.
//!
//! A [`CReal`] is a deterministic map `n -> r_n` with `|x - r_n| <= 2^-n`.
//! There is no equality test: [`creal_cmp`] only separates two reals when an
//! approximation at the requested precision proves it.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::exact::{exp2_enclosure, log2_enclosure, Interval, Rational};

/// Default search ceiling for nonzero and positivity witnesses.
pub const DEFAULT_WITNESS_MAX: u32 = 64;

type ApproxFn = dyn Fn(u32) -> Rational + Send + Sync;

struct Inner {
    approx: Box<ApproxFn>,
    memo: Mutex<HashMap<u32, Rational>>,
}

/// A computable real number. Cloning shares the approximator and its memo.
#[derive(Clone)]
pub struct CReal(Arc<Inner>);

impl fmt::Debug for CReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CReal(~{})", self.approx(32).to_decimal(10))
    }
}

impl CReal {
    /// Wraps an approximator. The caller promises `|x - approx(n)| <= 2^-n`.
    pub fn from_fn(f: impl Fn(u32) -> Rational + Send + Sync + 'static) -> CReal {
        CReal(Arc::new(Inner { approx: Box::new(f), memo: Mutex::new(HashMap::new()) }))
    }

    /// Builds a real from a certified enclosure routine: `enclose(p)` must
    /// return an interval of width at most `2^-p` containing the value.
    pub fn from_enclosure(enclose: impl Fn(u32) -> Interval + Send + Sync + 'static) -> CReal {
        CReal::from_fn(move |n| enclose(n + 2).mid().dyadic_round(n + 2))
    }

    pub fn approx(&self, n: u32) -> Rational {
        if let Some(r) = self.0.memo.lock().expect("memo poisoned").get(&n) {
            return r.clone();
        }
        let r = (self.0.approx)(n);
        self.0.memo.lock().expect("memo poisoned").entry(n).or_insert(r).clone()
    }

    /// `[approx(n) - 2^-n, approx(n) + 2^-n]`.
    pub fn enclosure(&self, n: u32) -> Interval {
        Interval::ball(&self.approx(n), &Rational::pow2(-(n as i64)))
    }

    /// Power-of-two upper bound exponent `k` with `|x| <= 2^k`, read at precision 4.
    pub fn magnitude_bits(&self) -> u32 {
        let bound = self.approx(4).abs() + Rational::pow2(-4);
        bound.floor_log2().map_or(0, |k| (k + 1).max(0) as u32)
    }

    /// Smallest `N <= max` with `|approx(N)| > 2 * 2^-N`, which proves `|x| > 2^-N`.
    pub fn nonzero_witness(&self, max: u32) -> Result<u32> {
        (0..=max)
            .find(|&n| self.approx(n).abs() > Rational::pow2(1 - n as i64))
            .ok_or(Error::IndeterminateSign { max_precision: max })
    }

    /// Like [`nonzero_witness`](Self::nonzero_witness) but also requires the sign to be positive.
    pub fn positive_witness(&self, max: u32) -> Result<u32> {
        for n in 0..=max {
            let a = self.approx(n);
            if a > Rational::pow2(1 - n as i64) {
                return Ok(n);
            }
            if a < -Rational::pow2(1 - n as i64) {
                return Err(Error::Domain("value is certified negative".into()));
            }
        }
        Err(Error::IndeterminateSign { max_precision: max })
    }
}

pub fn creal_from_rational(q: Rational) -> CReal {
    CReal::from_fn(move |_| q.clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CRealOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CRealUnary {
    Exp2,
    Log2,
}

pub fn add(x: &CReal, y: &CReal) -> CReal {
    let (x, y) = (x.clone(), y.clone());
    CReal::from_fn(move |n| (x.approx(n + 2) + y.approx(n + 2)).dyadic_round(n + 1))
}

pub fn sub(x: &CReal, y: &CReal) -> CReal {
    let (x, y) = (x.clone(), y.clone());
    CReal::from_fn(move |n| (x.approx(n + 2) - y.approx(n + 2)).dyadic_round(n + 1))
}

pub fn neg(x: &CReal) -> CReal {
    let x = x.clone();
    CReal::from_fn(move |n| -x.approx(n))
}

pub fn scale(x: &CReal, c: &Rational) -> CReal {
    mul(x, &creal_from_rational(c.clone()))
}

pub fn mul(x: &CReal, y: &CReal) -> CReal {
    let (x, y) = (x.clone(), y.clone());
    CReal::from_fn(move |n| {
        // |xy - x~y~| <= |x| e + (|y| + e) e <= 2^-(n+2) once 2^guard >= |x| + |y| + 1
        let guard = x.magnitude_bits().max(y.magnitude_bits()) + 2;
        let m = n + guard + 2;
        (x.approx(m) * y.approx(m)).dyadic_round(n + 1)
    })
}

/// `1/y`, with the nonzero witness searched up to `witness_max`.
pub fn recip(y: &CReal, witness_max: u32) -> Result<CReal> {
    let n0 = y.nonzero_witness(witness_max)?;
    let y = y.clone();
    Ok(CReal::from_fn(move |n| {
        // |y| > 2^-n0 and |y~| >= 2^-(n0+1), so |1/y - 1/y~| <= e 2^(2 n0 + 1)
        let m = n + 2 * n0 + 3;
        y.approx(m).recip().expect("witness bounds the approximation away from zero").dyadic_round(n + 1)
    }))
}

pub fn div(x: &CReal, y: &CReal, witness_max: u32) -> Result<CReal> {
    Ok(mul(x, &recip(y, witness_max)?))
}

pub fn log2(x: &CReal, witness_max: u32) -> Result<CReal> {
    let n0 = x.positive_witness(witness_max)?;
    let x = x.clone();
    Ok(CReal::from_fn(move |n| {
        // x and x~ exceed 2^-(n0+1); log2 is Lipschitz there with constant 2^(n0+1)/ln 2 < 2^(n0+2)
        let m = n + n0 + 4;
        let xm = x.approx(m);
        log2_enclosure(&xm, n + 2).expect("approximation stays positive").mid().dyadic_round(n + 2)
    }))
}

pub fn exp2(x: &CReal) -> CReal {
    let x = x.clone();
    CReal::from_fn(move |n| {
        // 2^t is Lipschitz with constant ln2 * 2^(|x| + 1) near x
        let k = x.magnitude_bits();
        let lip_bits = if k >= 31 { u32::MAX / 4 } else { (1u32 << k) + 1 };
        let m = n + lip_bits + 2;
        exp2_enclosure(&x.approx(m), n + 2).mid().dyadic_round(n + 2)
    })
}

pub fn creal_arith(x: &CReal, y: &CReal, op: CRealOp, witness_max: u32) -> Result<CReal> {
    Ok(match op {
        CRealOp::Add => add(x, y),
        CRealOp::Sub => sub(x, y),
        CRealOp::Mul => mul(x, y),
        CRealOp::Div => div(x, y, witness_max)?,
    })
}

pub fn creal_unary(x: &CReal, op: CRealUnary, witness_max: u32) -> Result<CReal> {
    Ok(match op {
        CRealUnary::Exp2 => exp2(x),
        CRealUnary::Log2 => log2(x, witness_max)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Less,
    Greater,
    IndistinguishableAt(u32),
}

/// Certified ordering at precision `n`. Approximations are read at `n + 2`,
/// so a non-separating answer implies `|x - y| <= 2^-n`.
pub fn creal_cmp(x: &CReal, y: &CReal, n: u32) -> Comparison {
    if Arc::ptr_eq(&x.0, &y.0) {
        return Comparison::IndistinguishableAt(n);
    }
    let m = n + 2;
    let d = x.approx(m) - y.approx(m);
    let slack = Rational::pow2(1 - m as i64);
    if d > slack {
        Comparison::Greater
    } else if d < -slack {
        Comparison::Less
    } else {
        Comparison::IndistinguishableAt(n)
    }
}

/// A computable double sequence: `approx2(m, k)` is within `2^-m` of `x_k`.
#[derive(Clone)]
pub struct CSeq(Arc<dyn Fn(u32, u64) -> Rational + Send + Sync>);

impl CSeq {
    pub fn new(f: impl Fn(u32, u64) -> Rational + Send + Sync + 'static) -> CSeq {
        CSeq(Arc::new(f))
    }

    /// A sequence whose elements are exact rationals.
    pub fn from_rationals(f: impl Fn(u64) -> Rational + Send + Sync + 'static) -> CSeq {
        CSeq(Arc::new(move |_, k| f(k)))
    }

    pub fn approx2(&self, m: u32, k: u64) -> Rational {
        (self.0)(m, k)
    }

    pub fn element(&self, k: u64) -> CReal {
        let s = self.clone();
        CReal::from_fn(move |m| s.approx2(m, k))
    }
}

/// Effective modulus of convergence: `|x_k - x| <= 2^-N` for all `k >= e(N)`.
#[derive(Clone)]
pub struct ModulusFn(Arc<dyn Fn(u32) -> u64 + Send + Sync>);

impl ModulusFn {
    pub fn new(f: impl Fn(u32) -> u64 + Send + Sync + 'static) -> ModulusFn {
        ModulusFn(Arc::new(f))
    }

    pub fn eval(&self, n: u32) -> u64 {
        (self.0)(n)
    }

    /// Smallest index whose certified tail bound is at most `2^-N`, searching up to `cap`.
    pub fn from_tail_bound(tail: impl Fn(u64) -> Rational + Send + Sync + 'static, cap: u64) -> ModulusFn {
        ModulusFn::new(move |n| {
            let target = Rational::pow2(-(n as i64));
            // tail is nonincreasing: gallop then bisect
            let mut hi = 1u64;
            while hi < cap && tail(hi) > target {
                hi = (hi * 2).min(cap);
            }
            let mut lo = hi / 2;
            while lo + 1 < hi {
                let mid = lo + (hi - lo) / 2;
                if tail(mid) <= target {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            if tail(lo) <= target {
                lo
            } else {
                hi
            }
        })
    }
}

/// Limit of an effectively convergent sequence. Garbage in, garbage out:
/// the modulus is trusted, not checked.
pub fn effective_limit(s: &CSeq, e: &ModulusFn) -> CReal {
    let (s, e) = (s.clone(), e.clone());
    CReal::from_fn(move |n| s.approx2(n + 2, e.eval(n + 2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    /// A real given by a truncated series with a messy approximator, for property tests.
    fn series_real(a: i64, b: i64) -> CReal {
        // a/b + sum_{k>=1} (-1)^k / (k^2 2^k), truncated so that the error is below 2^-n
        CReal::from_fn(move |n| {
            let mut s = q(a, b);
            for k in 1..=(n as i64 + 2) {
                let t = Rational::pow2(-k).checked_div(&Rational::from(k * k)).unwrap();
                s = if k % 2 == 0 { s + t } else { s - t };
            }
            s
        })
    }

    fn pi_like() -> CReal {
        // 4 * atan(1) via Machin would do; the exact value is irrelevant here
        series_real(355, 113)
    }

    #[test]
    fn from_rational() {
        let z = creal_from_rational(Rational::zero());
        assert!((0..20).all(|n| z.approx(n).is_zero()));
        let h = creal_from_rational(q(1, 2));
        assert_eq!(h.approx(100), q(1, 2));
    }

    #[test]
    fn identities() {
        let x = pi_like();
        let s = add(&x, &creal_from_rational(Rational::zero()));
        for n in 0..40 {
            assert!((s.approx(n) - x.approx(n)).abs() <= Rational::pow2(1 - n as i64));
        }
        let p = mul(&x, &creal_from_rational(Rational::one()));
        for n in 0..40 {
            assert!(
                (p.approx(n) - x.approx(n + 4)).abs() <= Rational::pow2(-(n as i64)) + Rational::pow2(-(n as i64) - 4)
            );
        }
    }

    #[test]
    fn log2_of_eight() {
        let l = log2(&creal_from_rational(q(8, 1)), DEFAULT_WITNESS_MAX).unwrap();
        assert!((l.approx(20) - q(3, 1)).abs() <= Rational::pow2(-20));
        let lz = log2(&creal_from_rational(Rational::zero()), 16);
        assert_eq!(lz.err(), Some(Error::IndeterminateSign { max_precision: 16 }));
        let dz = div(&pi_like(), &creal_from_rational(Rational::zero()), 16);
        assert!(matches!(dz, Err(Error::IndeterminateSign { .. })));
    }

    #[test]
    fn exp2_log2_roundtrip() {
        let x = creal_from_rational(q(5, 3));
        let y = log2(&exp2(&x), 64).unwrap();
        assert!((y.approx(30) - q(5, 3)).abs() <= Rational::pow2(-29));
    }

    #[test]
    fn cmp_examples() {
        let zero = creal_from_rational(Rational::zero());
        let one = creal_from_rational(Rational::one());
        assert_eq!(creal_cmp(&zero, &one, 4), Comparison::Less);
        assert_eq!(creal_cmp(&one, &zero, 4), Comparison::Greater);
        assert_eq!(creal_cmp(&one, &one, 50), Comparison::IndistinguishableAt(50));
        let a = creal_from_rational(q(1, 3));
        let b = creal_from_rational(q(341, 1024));
        assert_eq!(creal_cmp(&a, &b, 12), Comparison::Greater);
    }

    #[test]
    fn effective_limit_examples() {
        let c = CSeq::from_rationals(|_| q(1, 2));
        let x = effective_limit(&c, &ModulusFn::new(|_| 0));
        assert_eq!(x.approx(10), q(1, 2));
        // x_k = 1 - 2^-k, modulus e(N) = N
        let g = CSeq::from_rationals(|k| Rational::one() - Rational::pow2(-(k as i64)));
        let y = effective_limit(&g, &ModulusFn::new(|n| n as u64));
        for n in 0..50 {
            assert!((y.approx(n) - Rational::one()).abs() <= Rational::pow2(-(n as i64)));
        }
        let m = ModulusFn::from_tail_bound(|k| Rational::pow2(-(k as i64)), 1 << 20);
        assert_eq!(m.eval(7), 7);
        assert_eq!(m.eval(0), 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn modulus_contract(a in -50i64..50, b in 1i64..50, n in 0u32..56) {
            let x = series_real(a, b);
            let d = (x.approx(n) - x.approx(n + 8)).abs();
            prop_assert!(d <= Rational::pow2(-(n as i64)) + Rational::pow2(-(n as i64) - 8));
        }

        #[test]
        fn arithmetic_consistency(a in -20i64..20, b in 1i64..20, c in 1i64..20, d in 1i64..20, n in 0u32..40) {
            let x = series_real(a, b);
            let y = series_real(c, d);
            let m = n + 12;
            let (xi, yi) = (x.enclosure(m), y.enclosure(m));
            let tol = Rational::pow2(-(n as i64));
            for (op, enc) in [
                (CRealOp::Add, &xi + &yi),
                (CRealOp::Sub, &xi - &yi),
                (CRealOp::Mul, &xi * &yi),
            ] {
                let r = creal_arith(&x, &y, op, 64).unwrap().approx(n);
                let widened = Interval::new(enc.lo() - &tol, enc.hi() + &tol).unwrap();
                prop_assert!(widened.contains(&r));
            }
        }

        #[test]
        fn cmp_never_contradicts(a in -200i64..200, b in 1i64..100, c in -200i64..200, d in 1i64..100, n in 0u32..30) {
            let (x, y) = (q(a, b), q(c, d));
            let got = creal_cmp(&creal_from_rational(x.clone()), &creal_from_rational(y.clone()), n);
            match got {
                Comparison::Less => prop_assert!(x < y),
                Comparison::Greater => prop_assert!(x > y),
                Comparison::IndistinguishableAt(_) => prop_assert!((x - y).abs() <= Rational::pow2(2 - n as i64)),
            }
        }
    }
}
