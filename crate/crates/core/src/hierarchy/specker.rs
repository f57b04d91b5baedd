//! Specker numbers `x = sum_{l >= 1} 2^-phi(l)`.

use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::exact::Rational;

use super::certs::Sigma1Cert;
use super::enumerator::REEnumerator;

/// Sum of `2^-phi(l)` over an injective enumerator with values `>= 1`.
/// Partial sums are strictly increasing and stay below 1.
#[derive(Clone, Debug)]
pub struct SpeckerNumber {
    enumerator: REEnumerator,
    prefix: Arc<Mutex<Vec<Rational>>>,
}

impl SpeckerNumber {
    pub fn new(enumerator: REEnumerator) -> Self {
        SpeckerNumber { enumerator, prefix: Arc::new(Mutex::new(vec![Rational::zero()])) }
    }

    pub fn enumerator(&self) -> &REEnumerator {
        &self.enumerator
    }

    /// `2^-phi(l)`.
    pub fn weight(&self, l: u64) -> Result<Rational> {
        let v = self.enumerator.phi(l)?;
        if v == 0 {
            return Err(Error::Validation("enumerator emitted 0; Specker weights need phi >= 1".into()));
        }
        Ok(Rational::pow2(-(v as i64)))
    }

    /// `sum_{l=1..k} 2^-phi(l)`; `k = 0` gives 0.
    pub fn partial(&self, k: u64) -> Result<Rational> {
        let mut p = self.prefix.lock().expect("prefix cache poisoned");
        while (p.len() as u64) <= k {
            let l = p.len() as u64;
            let next = p.last().expect("nonempty") + &self.weight(l)?;
            p.push(next);
        }
        Ok(p[k as usize].clone())
    }

    /// `1 - partial(k)`, which bounds `sum_{l > k} 2^-phi(l)` because the
    /// exponents are distinct positive integers.
    pub fn residual_bound(&self, k: u64) -> Result<Rational> {
        Ok(Rational::one() - self.partial(k)?)
    }

    /// The limit as a Σ₁ certificate with bound `K = 1`. Panics if a finite
    /// injected backend is asked for more terms than it holds.
    pub fn to_sigma1(&self) -> Sigma1Cert {
        let s = self.clone();
        Sigma1Cert::new(format!("specker[{}]", self.enumerator.label()), 1, move |k| {
            s.partial(k).unwrap_or_else(|e| panic!("{e}"))
        })
    }
}

pub fn specker_partial(s: &SpeckerNumber, k: u64) -> Result<Rational> {
    s.partial(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::{sigma1_partial, sigma1_shift};

    #[test]
    fn closed_forms() {
        let s = SpeckerNumber::new(REEnumerator::identity());
        assert_eq!(specker_partial(&s, 3).unwrap(), Rational::frac(7, 8));
        let even = SpeckerNumber::new(REEnumerator::from_fn("phi(l)=2l", |i| 2 * (i + 1)));
        assert_eq!(specker_partial(&even, 2).unwrap(), Rational::frac(5, 16));
    }

    #[test]
    fn cert_matches_direct_sum() {
        let e = REEnumerator::from_fn("phi(l)=3l+1 mod perm", |i| 3 * i + 2);
        let s = SpeckerNumber::new(e.clone());
        let c = s.to_sigma1();
        let brute: Rational = (1..=16).map(|l| Rational::pow2(-(e.phi(l).unwrap() as i64))).sum();
        assert_eq!(sigma1_partial(&c, 16), brute);
        assert!(c.check(200).is_ok());
    }

    #[test]
    fn dovetail_prefix_properties() {
        let s = SpeckerNumber::new(REEnumerator::dovetail_tm());
        let mut prev = specker_partial(&s, 1).unwrap();
        for k in 2..=10 {
            let cur = specker_partial(&s, k).unwrap();
            assert!(cur > prev);
            prev = cur;
        }
        assert!(prev < Rational::one());
        let shifted = sigma1_shift(&s.to_sigma1(), &Rational::frac(3, 2));
        assert!(shifted.check(64).is_ok());
        assert!(shifted.term(64) < Rational::from(shifted.bound()));
    }

    #[test]
    fn exhausted_table_is_an_error() {
        let s = SpeckerNumber::new(REEnumerator::from_table("t", vec![2, 5]).unwrap());
        assert_eq!(s.partial(2).unwrap(), Rational::frac(9, 32));
        assert!(s.partial(3).is_err());
    }
}
