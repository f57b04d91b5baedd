//! Bump-train densities `f(a) = (1/z*) sum_n d_n/M(n) g(|a| - alpha*_n)`.
//!
//! With `d_n = a_n - a_{n-1}` (`a_0 := 0`) the weights `d_n/M(n)` sum to `z*`,
//! and `alpha*_n = Phi(z* M(n) / 2)` makes every bump contribute exactly
//! `d_n` to `int log2(a^2) f(a) da`.

use serde::Serialize;

use crate::creal::{effective_limit, CReal, CSeq, ModulusFn};
use crate::error::{Error, Result};
use crate::exact::{Interval, Rational};
use crate::hierarchy::Sigma1Cert;

use super::bump::{g_interval, mag_bits, moment_enclosure, phi_interval, psi_interval};

#[derive(Clone, Debug)]
pub struct BumpTrainOptions {
    /// Working precision of `alpha*` enclosures.
    pub bits: u32,
    /// Largest partial-sum index the `z*` modulus may ask for.
    pub term_cap: u64,
}

impl Default for BumpTrainOptions {
    fn default() -> Self {
        BumpTrainOptions { bits: 40, term_cap: 1 << 16 }
    }
}

/// `d_n` for `n = 1..=terms`; `sum_{n<=M} d_n = term(M)` exactly.
pub fn bump_weights(x1: &Sigma1Cert, terms: u64) -> Result<Vec<Rational>> {
    let mut prev = Rational::zero();
    let mut out = Vec::with_capacity(terms as usize);
    for n in 1..=terms {
        let a = x1.term(n);
        let d = &a - &prev;
        if d.is_negative() {
            return Err(Error::Validation(format!("{}: term({n}) decreases", x1.label())));
        }
        out.push(d);
        prev = a;
    }
    Ok(out)
}

/// Cheap certified `M(n) >= floor(log2(n + 1))`, from `log2(a + n) >= log2(n + 1)` on the support.
fn moment_floor(n: u64) -> Rational {
    Rational::from(63 - (n + 1).leading_zeros() as i64)
}

/// Bound on `sum_{n > k} d_n`: the declared tail if any, else `K - term(k)`.
fn tail_d(x1: &Sigma1Cert, k: u64) -> Rational {
    let generic = Rational::from(x1.bound()) - x1.term(k);
    match x1.declared_tail(k) {
        Some(t) => t.min(generic),
        None => generic,
    }
}

/// Bound on `sum_{n > k} d_n / M(n)`, using that `M` increases.
fn tail_z(x1: &Sigma1Cert, k: u64) -> Rational {
    tail_d(x1, k).checked_div(&moment_floor(k + 1)).expect("floor log2(k+2) >= 1")
}

#[derive(Clone, Debug)]
pub struct BumpTrainPdf {
    source: Sigma1Cert,
    terms: u64,
    bits: u32,
    term_cap: u64,
    d: Vec<Rational>,
    weights: Vec<Interval>,
    zstar: CReal,
    zstar_enc: Interval,
    alpha: Vec<Interval>,
}

impl BumpTrainPdf {
    pub fn source(&self) -> &Sigma1Cert {
        &self.source
    }

    pub fn terms(&self) -> u64 {
        self.terms
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// `d_n`, `1 <= n <= terms`.
    pub fn d(&self, n: u64) -> &Rational {
        &self.d[(n - 1) as usize]
    }

    /// Enclosure of `d_n / M(n)`.
    pub fn weight(&self, n: u64) -> &Interval {
        &self.weights[(n - 1) as usize]
    }

    /// `alpha*_n` enclosure, width at most `2^-bits`.
    pub fn alpha_star(&self, n: u64) -> &Interval {
        &self.alpha[(n - 1) as usize]
    }

    /// `z*` as a computable real. Valid only up to [`BumpTrainPdf::zstar_achievable_bits`].
    pub fn zstar(&self) -> &CReal {
        &self.zstar
    }

    pub fn zstar_enclosure(&self) -> &Interval {
        &self.zstar_enc
    }

    /// Largest `N` such that the `z*` tail bound reaches `2^-N` within the term cap.
    pub fn zstar_achievable_bits(&self) -> u32 {
        achievable_bits(&self.source, self.term_cap)
    }

    /// `z*` to `2^-bits`, or a precision-cap error naming what is reachable.
    pub fn zstar_to(&self, bits: u32) -> Result<Interval> {
        zstar_enclosure(&self.source, bits, self.term_cap)
    }

    /// Bound on `sum_{n > k} d_n`.
    pub fn tail_d(&self, k: u64) -> Rational {
        tail_d(&self.source, k)
    }

    /// Bound on `sum_{n > k} d_n / M(n)`.
    pub fn tail_weight(&self, k: u64) -> Rational {
        tail_z(&self.source, k)
    }

    /// Bound on the probability mass carried by bumps past `k`.
    pub fn tail_mass(&self, k: u64) -> Rational {
        self.tail_weight(k).checked_div(self.zstar_enc.lo()).expect("z* > 0")
    }

    /// `int f` over the first `terms` bumps; `1` lies in `[lo, hi + tail_mass]`.
    pub fn truncated_mass(&self) -> Interval {
        let s: Interval = self.weights.iter().cloned().sum();
        s.checked_div(&self.zstar_enc).expect("z* > 0")
    }

    /// `int log2(a^2) f(a) da` over the first `terms` bumps, via `Psi(alpha*_n)`.
    pub fn log_moment_truncated(&self) -> Result<Interval> {
        let mut acc = Interval::zero();
        for n in 1..=self.terms {
            let p = psi_interval(self.alpha_star(n), self.bits)?;
            acc = &acc + &(self.weight(n) * &p);
        }
        Ok(acc.scale(&Rational::from(2i64)).checked_div(&self.zstar_enc)?.round_out(self.bits + 8))
    }

    /// `f(a)` with the first `terms` bumps plus a uniform bound for the rest.
    pub fn eval(&self, a: &Rational, terms: u64) -> Interval {
        let terms = terms.min(self.terms).max(1);
        let x = a.abs();
        if x <= Rational::one() {
            return Interval::zero();
        }
        let mut acc = Interval::zero();
        for n in 1..=terms {
            let shifted = &Interval::point(x.clone()) - self.alpha_star(n);
            acc = &acc + &(self.weight(n) * &g_interval(&shifted));
        }
        let v = acc.checked_div(&self.zstar_enc).expect("z* > 0");
        // later bumps start at 1 + alpha*_{terms+1} >= 1 + alpha*_terms
        let reach = Rational::one() + self.alpha_star(terms).lo();
        if x <= reach {
            return v;
        }
        let tail = self.tail_mass(terms).shl(-2);
        Interval::new(v.lo().clone(), v.hi() + &tail).expect("ordered")
    }

    pub fn descriptor(&self) -> super::PdfDescriptor {
        super::PdfDescriptor::BumpTrain(BumpTrainDescriptor {
            source: self.source.label().to_string(),
            bound_k: self.source.bound(),
            truncation: self.terms,
            bits: self.bits,
            zstar: self.zstar_enc.clone(),
            d: self.d.clone(),
            alpha_star: self.alpha.clone(),
            tail_bound: self.tail_mass(self.terms),
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BumpTrainDescriptor {
    pub source: String,
    pub bound_k: u64,
    pub truncation: u64,
    pub bits: u32,
    pub zstar: Interval,
    pub d: Vec<Rational>,
    pub alpha_star: Vec<Interval>,
    pub tail_bound: Rational,
}

fn achievable_bits(x1: &Sigma1Cert, cap: u64) -> u32 {
    let t = tail_z(x1, cap);
    if t.is_zero() {
        return u32::MAX;
    }
    (-(t.floor_log2().expect("positive") + 1)).max(0) as u32
}

/// Partial sum `sum_{n<=k} d_n/M(n)` with width at most `2^-bits`.
fn zstar_partial(x1: &Sigma1Cert, k: u64, bits: u32) -> Result<Interval> {
    let kb = 64 - k.leading_zeros();
    let extra = kb + mag_bits(&Rational::from(x1.bound())) + 2;
    let mut acc = Interval::zero();
    let mut prev = Rational::zero();
    for n in 1..=k {
        let a = x1.term(n);
        let d = &a - &prev;
        prev = a;
        if d.is_zero() {
            continue;
        }
        let m = moment_enclosure(n, bits + extra)?;
        acc = (&acc + &Interval::point(d).checked_div(&m)?).round_out(bits + extra);
    }
    Ok(acc)
}

fn zstar_index(x1: &Sigma1Cert, bits: u32, cap: u64) -> Result<u64> {
    let target = Rational::pow2(-(bits as i64));
    if tail_z(x1, cap) > target {
        return Err(Error::PrecisionCap {
            requested_bits: bits,
            achievable_bits: achievable_bits(x1, cap),
            reason: format!("z* tail bound for {} does not reach 2^-{bits} within {cap} terms", x1.label()),
        });
    }
    let x = x1.clone();
    Ok(ModulusFn::from_tail_bound(move |k| tail_z(&x, k), cap).eval(bits))
}

fn zstar_enclosure(x1: &Sigma1Cert, bits: u32, cap: u64) -> Result<Interval> {
    let k = zstar_index(x1, bits + 1, cap)?;
    let s = zstar_partial(x1, k, bits + 2)?;
    Interval::new(s.lo().clone(), s.hi() + &tail_z(x1, k))
}

/// Builds `f_1` from a Σ₁ certificate, keeping `terms` bumps.
pub fn build_bump_train(x1: &Sigma1Cert, terms: u64, opts: &BumpTrainOptions) -> Result<BumpTrainPdf> {
    if terms == 0 {
        return Err(Error::Validation("bump train needs at least one term".into()));
    }
    let d = bump_weights(x1, terms)?;
    if d.iter().all(|v| v.is_zero()) {
        return Err(Error::Validation(format!("{}: all retained d_n vanish", x1.label())));
    }
    let bits = opts.bits;
    let moments: Vec<Interval> = (1..=terms).map(|n| moment_enclosure(n, bits + 16)).collect::<Result<_>>()?;
    let weights: Vec<Interval> = d
        .iter()
        .zip(&moments)
        .map(|(d, m)| Interval::point(d.clone()).checked_div(m).map(|w| w.round_out(bits + 24)))
        .collect::<Result<_>>()?;

    // Phi' <= (u + 4) ln 2 and the argument carries a factor M(n)/2.
    let rough_z = zstar_enclosure(x1, 8, opts.term_cap)?;
    let top = (&rough_z * &moments[terms as usize - 1]).scale(&Rational::frac(1, 2));
    let rough_alpha = phi_interval(&top, 4)?;
    let extra = mag_bits(&(rough_alpha.hi() + &Rational::from(4i64))) + mag_bits(moments[terms as usize - 1].hi());
    let zstar_enc = zstar_enclosure(x1, bits + extra + 4, opts.term_cap)?;

    let mut alpha = Vec::with_capacity(terms as usize);
    for m in &moments {
        let arg = (&zstar_enc * m).scale(&Rational::frac(1, 2));
        alpha.push(phi_interval(&arg, bits + 1)?);
    }

    let x = x1.clone();
    let seq = {
        let x = x.clone();
        CSeq::new(move |m, k| zstar_partial(&x, k, m + 1).expect("n >= 1").mid())
    };
    let modulus = {
        let x = x.clone();
        ModulusFn::from_tail_bound(move |k| tail_z(&x, k), opts.term_cap)
    };
    Ok(BumpTrainPdf {
        source: x,
        terms,
        bits,
        term_cap: opts.term_cap,
        d,
        weights,
        zstar: effective_limit(&seq, &modulus),
        zstar_enc,
        alpha,
    })
}

/// Free-function form of [`BumpTrainPdf::eval`].
pub fn pdf_eval(p: &BumpTrainPdf, a: &Rational, terms: u64) -> Interval {
    p.eval(a, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{eval_g, psi_point};
    use crate::fixtures;

    #[test]
    fn telescoping_is_exact() {
        let raw = Sigma1Cert::new("1-2^-k", 1, |k| Rational::one() - Rational::pow2(-(k as i64)));
        let d = bump_weights(&raw, 12).unwrap();
        assert_eq!(d.iter().cloned().sum::<Rational>(), Rational::frac(4095, 4096));
        let x1 = fixtures::geo_shifted();
        for m in [1u64, 7, 64, 512] {
            let d = bump_weights(&x1, m).unwrap();
            assert_eq!(d.into_iter().sum::<Rational>(), x1.term(m));
        }
    }

    #[test]
    fn unshifted_geometric_is_below_range() {
        let raw = Sigma1Cert::new("1-2^-k", 1, |k| Rational::one() - Rational::pow2(-(k as i64)))
            .with_tail(|k| Rational::pow2(-(k as i64)));
        let r = build_bump_train(&raw, 4, &BumpTrainOptions::default());
        assert!(matches!(r, Err(Error::BelowRange(_))), "{r:?}");
    }

    #[test]
    fn generic_tail_hits_precision_cap() {
        let x = Sigma1Cert::new("no-tail", 5, |k| Rational::from(4i64) - Rational::pow2(-(k as i64)));
        let opts = BumpTrainOptions { bits: 20, term_cap: 1 << 12 };
        match build_bump_train(&x, 4, &opts) {
            Err(Error::PrecisionCap { achievable_bits, .. }) => assert!(achievable_bits < 8),
            other => panic!("expected precision cap, got {other:?}"),
        }
    }

    #[test]
    fn shifted_geometric_train() {
        let x1 = fixtures::geo_shifted();
        let p = build_bump_train(&x1, 12, &BumpTrainOptions::default()).unwrap();
        let z = p.zstar_enclosure();
        assert!((z.mid().to_f64() - 2.175).abs() < 1e-3, "{}", z.mid().to_f64());
        assert!((p.alpha_star(1).mid().to_f64() - 1.386).abs() < 1e-3);
        assert!((1..12).all(|n| p.alpha_star(n).hi() < p.alpha_star(n + 1).lo()));

        let mass = p.truncated_mass();
        let tau = p.tail_mass(12);
        assert!(mass.lo() <= &Rational::one() && Rational::one() <= (mass.hi() + &tau));

        let lm = p.log_moment_truncated().unwrap();
        assert!(lm.contains(&x1.term(12)), "{lm}");

        assert_eq!(p.eval(&Rational::frac(1, 2), 12), Interval::zero());
        let a0 = Rational::frac(37, 10);
        assert_eq!(p.eval(&a0, 12), p.eval(&-a0.clone(), 12));
        // single-term oracle at the first bump's plateau
        let a = p.alpha_star(1).mid() + Rational::frac(5, 2);
        let single = (&Interval::point(p.d(1).clone()) * &Interval::point(eval_g(&(&a - &p.alpha_star(1).mid()))))
            .checked_div(&(p.zstar_enclosure() * &moment_enclosure(1, 40).unwrap()))
            .unwrap();
        let v = p.eval(&a, 1);
        assert!(v.lo() <= single.hi() && single.lo() <= v.hi());
        // each alpha* satisfies Psi(alpha*) = z* M(n)/2
        let lhs = psi_point(&p.alpha_star(5).mid(), 40).unwrap();
        let rhs = (p.zstar_enclosure() * &moment_enclosure(5, 40).unwrap()).scale(&Rational::frac(1, 2));
        assert!((&lhs - &rhs).max_abs() < Rational::pow2(-30));
    }
}
