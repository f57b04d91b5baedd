//! Monotone certificates for the first level of the arithmetical hierarchy.

use std::fmt;
use std::sync::Arc;

use num_traits::ToPrimitive;

use crate::exact::Rational;

type TermFn = Arc<dyn Fn(u64) -> Rational + Send + Sync>;

/// A nondecreasing computable sequence of rationals with a declared natural
/// upper bound `K` on its limit. Its limit is a Σ₁ real.
#[derive(Clone)]
pub struct Sigma1Cert {
    label: String,
    term: TermFn,
    bound: u64,
    tail: Option<TermFn>,
}

impl fmt::Debug for Sigma1Cert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Sigma1Cert")
            .field("label", &self.label)
            .field("bound", &self.bound)
            .field("declared_tail", &self.tail.is_some())
            .finish()
    }
}

/// A monotonicity or boundedness failure found while scanning a certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CertViolation {
    NotMonotone { k: u64, term_k: Rational, term_next: Rational },
    OutOfBound { k: u64, term_k: Rational, bound: i64 },
}

impl fmt::Display for CertViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertViolation::NotMonotone { k, term_k, term_next } => {
                write!(f, "monotonicity fails at k={k}: {term_k} then {term_next}")
            }
            CertViolation::OutOfBound { k, term_k, bound } => {
                write!(f, "term({k}) = {term_k} crosses declared bound {bound}")
            }
        }
    }
}

impl Sigma1Cert {
    pub fn new(label: impl Into<String>, bound: u64, term: impl Fn(u64) -> Rational + Send + Sync + 'static) -> Self {
        Sigma1Cert { label: label.into(), term: Arc::new(term), bound, tail: None }
    }

    /// Declares an effective tail: `lim - term(k) <= tail(k)`, nonincreasing in `k`.
    pub fn with_tail(mut self, tail: impl Fn(u64) -> Rational + Send + Sync + 'static) -> Self {
        self.tail = Some(Arc::new(tail));
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn term(&self, k: u64) -> Rational {
        (self.term)(k)
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn declared_tail(&self, k: u64) -> Option<Rational> {
        self.tail.as_ref().map(|t| t(k))
    }

    pub fn has_declared_tail(&self) -> bool {
        self.tail.is_some()
    }

    /// Scans `term(0..=k_max)` for monotonicity and the declared bound.
    pub fn check(&self, k_max: u64) -> Result<(), CertViolation> {
        let bound = Rational::from(self.bound);
        let mut prev = self.term(0);
        for k in 0..=k_max {
            if prev > bound {
                return Err(CertViolation::OutOfBound { k, term_k: prev, bound: self.bound as i64 });
            }
            if k == k_max {
                break;
            }
            let next = self.term(k + 1);
            if next < prev {
                return Err(CertViolation::NotMonotone { k, term_k: prev, term_next: next });
            }
            prev = next;
        }
        Ok(())
    }
}

/// Nonincreasing counterpart with a declared integer lower bound. Its limit is a Π₁ real.
#[derive(Clone)]
pub struct Pi1Cert {
    label: String,
    term: TermFn,
    bound: i64,
}

impl fmt::Debug for Pi1Cert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Pi1Cert").field("label", &self.label).field("bound", &self.bound).finish()
    }
}

impl Pi1Cert {
    pub fn new(
        label: impl Into<String>,
        lower_bound: i64,
        term: impl Fn(u64) -> Rational + Send + Sync + 'static,
    ) -> Self {
        Pi1Cert { label: label.into(), term: Arc::new(term), bound: lower_bound }
    }

    /// `-x` for a Σ₁ certificate `x`.
    pub fn negated(c: &Sigma1Cert) -> Self {
        let c2 = c.clone();
        Pi1Cert::new(format!("-({})", c.label()), -(c.bound() as i64), move |k| -c2.term(k))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn term(&self, k: u64) -> Rational {
        (self.term)(k)
    }

    pub fn lower_bound(&self) -> i64 {
        self.bound
    }

    pub fn check(&self, k_max: u64) -> Result<(), CertViolation> {
        let bound = Rational::from(self.bound);
        let mut prev = self.term(0);
        for k in 0..=k_max {
            if prev < bound {
                return Err(CertViolation::OutOfBound { k, term_k: prev, bound: self.bound });
            }
            if k == k_max {
                break;
            }
            let next = self.term(k + 1);
            if next > prev {
                return Err(CertViolation::NotMonotone { k, term_k: prev, term_next: next });
            }
            prev = next;
        }
        Ok(())
    }
}

/// A Δ₂ real presented as the difference of two Σ₁ reals. No error bound is
/// attached to any finite-index evaluation.
#[derive(Clone, Debug)]
pub struct Delta2Cert {
    pub a: Sigma1Cert,
    pub b: Sigma1Cert,
}

impl Delta2Cert {
    pub fn new(a: Sigma1Cert, b: Sigma1Cert) -> Self {
        Delta2Cert { a, b }
    }
}

pub fn sigma1_partial(c: &Sigma1Cert, k: u64) -> Rational {
    c.term(k)
}

/// `a.term(k) - b.term(k)`: converges to the Δ₂ value, with no certified distance to it.
pub fn delta2_anytime(d: &Delta2Cert, k: u64) -> Rational {
    d.a.term(k) - d.b.term(k)
}

/// `term(k) + u`; the declared bound grows by `ceil(u)` and any declared tail is kept.
pub fn sigma1_shift(c: &Sigma1Cert, u: &Rational) -> Sigma1Cert {
    let shifted_bound = (c.bound() as i64).saturating_add(u.ceil().to_i64().unwrap_or(i64::MAX)).max(0) as u64;
    let inner = c.clone();
    let u2 = u.clone();
    let mut out = Sigma1Cert::new(format!("{}+{}", c.label(), u), shifted_bound, move |k| inner.term(k) + &u2);
    out.tail = c.tail.clone();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geo() -> Sigma1Cert {
        Sigma1Cert::new("1-2^-k", 1, |k| Rational::one() - Rational::pow2(-(k as i64)))
            .with_tail(|k| Rational::pow2(-(k as i64)))
    }

    #[test]
    fn partial_examples() {
        assert_eq!(sigma1_partial(&geo(), 3), Rational::frac(7, 8));
        let z = Sigma1Cert::new("zero", 0, |_| Rational::zero());
        assert!((0..50).all(|k| sigma1_partial(&z, k).is_zero()));
        assert!(geo().check(2048).is_ok());
        assert!(z.check(100).is_ok());
    }

    #[test]
    fn anytime_examples() {
        let a = geo();
        let same = Delta2Cert::new(a.clone(), a.clone());
        assert!((0..64).all(|k| delta2_anytime(&same, k).is_zero()));
        let b = Sigma1Cert::new("1/2-2^-k", 1, |k| Rational::frac(1, 2) - Rational::pow2(-(k as i64)));
        let d = Delta2Cert::new(a, b);
        assert!((0..64).all(|k| delta2_anytime(&d, k) == Rational::frac(1, 2)));
    }

    #[test]
    fn shift_examples() {
        let a = geo();
        let s0 = sigma1_shift(&a, &Rational::zero());
        assert!((0..40).all(|k| s0.term(k) == a.term(k)));
        let s1 = sigma1_shift(&a, &Rational::one());
        assert!((0..40).all(|k| s1.term(k) == Rational::from(2i64) - Rational::pow2(-(k as i64))));
        assert_eq!(s1.bound(), 2);
        assert!(s1.has_declared_tail());
    }

    #[test]
    fn violations_are_reported() {
        let bad = Sigma1Cert::new("zigzag", 5, |k| Rational::from((k % 2) as i64));
        assert!(matches!(bad.check(4), Err(CertViolation::NotMonotone { k: 1, .. })));
        let over = Sigma1Cert::new("over", 1, |k| Rational::from(k as i64));
        assert!(matches!(over.check(10), Err(CertViolation::OutOfBound { k: 2, .. })));
        let p = Pi1Cert::negated(&geo());
        assert!(p.check(100).is_ok());
        let pbad = Pi1Cert::new("up", 0, |k| Rational::from(k as i64));
        assert!(pbad.check(3).is_err());
    }
}
