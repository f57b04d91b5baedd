//! The log-weight family `g_M`, its normalisers `K_M`, and the star density `f*`.
//!
//! All logarithms are base 2. For `M >= 4`:
//!
//! ```text
//! g_M(a) = (a - 2) c1                on (2, 3]
//!        = 1 / (a log2^2 a)          on (3, M]
//!        = (M + 1 - a) / (M log2^2 M) on (M, M + 1]
//! c1     = 1 / (3 log2^2 3) = max g_M
//! K_M    = int g_M(a) log2 a da     (certified quadrature)
//! g*     = sum_{M >= 4} 2^-phi(M) g_M / K_M,   f*(a) = g*(|a|) / (2 c2),  c2 = int g*
//! ```
//!
//! `int g_M = c1/2 + 1/(2 M log2^2 M) + ln2 (1/log2 3 - 1/log2 M) <= G` with
//! `G = c1/2 + 1/32 + ln2/log2 3`. Since `K_M` increases and the exponents
//! `phi(M)` are distinct positive integers, past a truncation `T`
//!
//! ```text
//! sum_{M > T} 2^-phi(M) <= R_T = 1 - sum_{l <= T} 2^-phi(l)
//! |g* - g*_T|      <= c1 R_T / K_{T+1}    (pointwise)
//! int |g* - g*_T|  <= G  R_T / K_{T+1}    (L1)
//! ```

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::Serialize;

use crate::creal::CReal;
use crate::error::{Error, Result};
use crate::exact::{inv_ln2_enclosure, ln2_enclosure, log2_enclosure, Interval, Rational};
use crate::hierarchy::{REEnumerator, SpeckerNumber};
use crate::quad::{integrate, Jet, Piece, QuadOptions, JET_BITS};

pub const FIRST_INDEX: u64 = 4;

fn check_index(m: u64) -> Result<()> {
    if m < FIRST_INDEX {
        return Err(Error::Validation(format!("g_M needs M >= 4, got {m}")));
    }
    Ok(())
}

/// `log2^2 x` enclosure.
fn log2_sq(x: &Rational, bits: u32) -> Result<Interval> {
    Ok(log2_enclosure(x, bits + 4)?.sqr().round_out(bits + 4))
}

/// `c1 = 1 / (3 log2^2 3)`.
pub fn c1(bits: u32) -> Interval {
    log2_sq(&Rational::from(3i64), bits + 4)
        .expect("3 > 0")
        .scale(&Rational::from(3i64))
        .recip()
        .expect("positive")
        .round_out(bits + 4)
}

/// Enclosure of `g_M(a)`.
pub fn eval_gm(m: u64, a: &Rational, bits: u32) -> Result<Interval> {
    check_index(m)?;
    let two = Rational::from(2i64);
    let three = Rational::from(3i64);
    let mq = Rational::from(m);
    let m1 = &mq + &Rational::one();
    if a <= &two || a >= &m1 {
        return Ok(Interval::zero());
    }
    if a <= &three {
        return Ok(c1(bits).scale(&(a - &two)));
    }
    if a <= &mq {
        return log2_sq(a, bits)?.scale(a).recip().map(|v| v.round_out(bits + 4));
    }
    Ok(log2_sq(&mq, bits)?.scale(&mq).recip()?.scale(&(&m1 - a)).round_out(bits + 4))
}

/// Closed-form `int g_M`.
pub fn gm_integral(m: u64, bits: u32) -> Result<Interval> {
    check_index(m)?;
    let mq = Rational::from(m);
    let l3 = log2_enclosure(&Rational::from(3i64), bits + 8)?;
    let lm = log2_enclosure(&mq, bits + 8)?;
    let ramp = lm.sqr().scale(&mq.shl(1)).recip()?;
    let mid = &l3.recip()? - &lm.recip()?;
    let out = &(&c1(bits + 4).scale(&Rational::frac(1, 2)) + &ramp) + &(&ln2_enclosure(bits + 8) * &mid);
    Ok(out.round_out(bits + 4))
}

/// `G`, a bound on `int g_M` uniform in `M`.
pub fn gm_integral_bound(bits: u32) -> Interval {
    let l3 = log2_enclosure(&Rational::from(3i64), bits + 8).expect("3 > 0");
    let a = &c1(bits + 4).scale(&Rational::frac(1, 2)) + &Interval::point(Rational::frac(1, 32));
    (&a + &ln2_enclosure(bits + 8).checked_div(&l3).expect("positive")).round_out(bits + 4)
}

fn quad_opts(bits: u32) -> QuadOptions {
    QuadOptions { tol: Rational::pow2(-(bits as i64)), budget: 1 << 20 }
}

/// `int_k^{k+1} da / (a log2 a)`, `k >= 3`, cached per grid.
fn unit_integral(k: u64, bits: u32) -> Result<Interval> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u32), Interval>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().expect("cache poisoned").get(&(k, bits)) {
        return Ok(v.clone());
    }
    let inv = inv_ln2_enclosure(bits + 16);
    let piece = Piece::new(Rational::from(k), Rational::from(k + 1), move |x: &Jet| x.mul(&x.log2(&inv)?).recip());
    let r = integrate(&[piece], &quad_opts(bits))?;
    if !r.converged {
        return Err(Error::PrecisionCap {
            requested_bits: bits,
            achievable_bits: (-r.enclosure.width().floor_log2().unwrap_or(0)).max(0) as u32,
            reason: format!("quadrature budget exhausted on [{k}, {}]", k + 1),
        });
    }
    cache.lock().expect("cache poisoned").insert((k, bits), r.enclosure.clone());
    Ok(r.enclosure)
}

/// Enclosure of `K_M` of width at most `2^-bits`, by certified quadrature.
pub fn km_enclosure(m: u64, bits: u32) -> Result<Interval> {
    check_index(m)?;
    let spread = 64 - m.leading_zeros();
    // round the unit grid up so that caches are shared across M
    let unit_bits = (bits + spread + 3).div_ceil(4) * 4;
    let inv = inv_ln2_enclosure(bits + 24);
    let c1v = c1(bits + 16);
    let first = Piece::new(Rational::from(2i64), Rational::from(3i64), {
        let inv = inv.clone();
        move |x: &Jet| Ok(x.add_const(&Rational::from(-2i64)).mul(&x.log2(&inv)?).scale_interval(&c1v))
    });
    let mq = Rational::from(m);
    let ramp_coef = log2_sq(&mq, bits + 16)?.scale(&mq).recip()?.round_out(bits + 16);
    let m1 = &mq + &Rational::one();
    let last = Piece::new(mq.clone(), m1.clone(), {
        let inv = inv.clone();
        move |x: &Jet| {
            let lin = x.scale(&-Rational::one()).add_const(&m1);
            Ok(lin.mul(&x.log2(&inv)?).scale_interval(&ramp_coef))
        }
    });
    let ends = integrate(&[first, last], &quad_opts(bits + 2))?;
    if !ends.converged {
        return Err(Error::PrecisionCap {
            requested_bits: bits,
            achievable_bits: 0,
            reason: "quadrature budget exhausted on K_M end pieces".into(),
        });
    }
    let mut acc = ends.enclosure;
    for k in 3..m {
        acc = &acc + &unit_integral(k, unit_bits)?;
    }
    Ok(acc.round_out(bits + 4))
}

/// `K_M` as a computable real.
pub fn compute_km(m: u64) -> Result<CReal> {
    check_index(m)?;
    Ok(CReal::from_enclosure(move |p| km_enclosure(m, p).expect("quadrature converges")))
}

#[derive(Clone, Debug)]
pub struct StarOptions {
    /// Precision of `K_M` and the log enclosures.
    pub bits: u32,
    /// Reject truncations whose certified L1 tail exceeds this.
    pub max_l1_tail: Option<Rational>,
}

impl Default for StarOptions {
    fn default() -> Self {
        StarOptions { bits: 24, max_l1_tail: None }
    }
}

/// Truncated `f*` with certified tails.
#[derive(Clone, Debug)]
pub struct StarPdf {
    specker: SpeckerNumber,
    truncation: u64,
    bits: u32,
    /// `2^-phi(M)` for `M = 4..=T`.
    weights: Vec<Rational>,
    /// `K_M` for `M = 4..=T+1`.
    km: Vec<Interval>,
    /// `2^-phi(M) / K_M`.
    coef: Vec<Interval>,
    residual: Rational,
    c2: Interval,
    l1_tail: Interval,
    point_tail: Interval,
}

impl StarPdf {
    pub fn truncation(&self) -> u64 {
        self.truncation
    }

    pub fn enumerator(&self) -> &REEnumerator {
        self.specker.enumerator()
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn km(&self, m: u64) -> &Interval {
        &self.km[(m - FIRST_INDEX) as usize]
    }

    pub fn coef(&self, m: u64) -> &Interval {
        &self.coef[(m - FIRST_INDEX) as usize]
    }

    pub fn weight(&self, m: u64) -> &Rational {
        &self.weights[(m - FIRST_INDEX) as usize]
    }

    /// `R_T`, a bound on the Specker weight past the truncation.
    pub fn residual(&self) -> &Rational {
        &self.residual
    }

    /// `c2 = int g*`.
    pub fn c2(&self) -> &Interval {
        &self.c2
    }

    /// Bound on `int |g* - g*_T|`.
    pub fn l1_tail(&self) -> &Interval {
        &self.l1_tail
    }

    /// Bound on the probability mass of `f* - f*_T`.
    pub fn mass_tail(&self) -> Rational {
        self.l1_tail.checked_div(&self.c2).expect("c2 > 0").hi().clone()
    }

    /// Bound on `|f* - f*_T|` anywhere.
    pub fn point_tail(&self) -> Rational {
        self.point_tail.checked_div(&self.c2.scale(&Rational::from(2i64))).expect("c2 > 0").hi().clone()
    }

    /// `g*_T(a)` for `a >= 0`.
    pub fn gstar_truncated(&self, a: &Rational) -> Result<Interval> {
        let mut acc = Interval::zero();
        for m in FIRST_INDEX..=self.truncation {
            let g = eval_gm(m, a, self.bits + 8)?;
            if !g.is_point() || !g.lo().is_zero() {
                acc = &acc + &(self.coef(m) * &g);
            }
        }
        Ok(acc)
    }

    /// `f*(a)` including the pointwise tail.
    pub fn eval(&self, a: &Rational) -> Result<Interval> {
        let x = a.abs();
        if x <= Rational::from(2i64) {
            return Ok(Interval::zero());
        }
        let g = self.gstar_truncated(&x)?;
        let g = Interval::new(g.lo().clone(), g.hi() + self.point_tail.hi())?;
        g.checked_div(&self.c2.scale(&Rational::from(2i64)))
    }

    /// `f*_T(a)` without the tail.
    pub fn eval_truncated(&self, a: &Rational) -> Result<Interval> {
        let x = a.abs();
        if x <= Rational::from(2i64) {
            return Ok(Interval::zero());
        }
        self.gstar_truncated(&x)?.checked_div(&self.c2.scale(&Rational::from(2i64)))
    }

    /// `f*_T` on `a >= 0` as `sum coef * basis`, each basis smooth on its unit interval.
    pub fn terms(&self) -> Vec<StarTerm> {
        let denom = self.c2.scale(&Rational::from(2i64)).recip().expect("c2 > 0");
        let all: Interval = self.coef.iter().cloned().sum();
        let mut out = vec![StarTerm {
            lo: Rational::from(2i64),
            hi: Rational::from(3i64),
            coef: (&(&all * &c1(self.bits + 8)) * &denom).round_out(self.bits + 16),
            basis: StarBasis::Rise,
        }];
        for k in 3..=self.truncation {
            let (lo, hi) = (Rational::from(k), Rational::from(k + 1));
            let upper: Interval = ((k + 1).max(FIRST_INDEX)..=self.truncation).map(|m| self.coef(m).clone()).sum();
            if !upper.is_point() || !upper.lo().is_zero() {
                out.push(StarTerm {
                    lo: lo.clone(),
                    hi: hi.clone(),
                    coef: (&upper * &denom).round_out(self.bits + 16),
                    basis: StarBasis::InvLogSq,
                });
            }
            if k >= FIRST_INDEX {
                let base = log2_sq(&lo, self.bits + 8).expect("k > 0").scale(&lo).recip().expect("positive");
                out.push(StarTerm {
                    lo,
                    hi,
                    coef: (&(&base * self.coef(k)) * &denom).round_out(self.bits + 16),
                    basis: StarBasis::Fall,
                });
            }
        }
        out
    }

    /// `int_k^{k+1} h f*_T` for `k = 2..=T`, indexed by `k - 2`; `h` must be smooth on each unit interval.
    pub fn unit_integrals(
        &self,
        h: &(dyn Fn(&Jet) -> Result<Jet> + Send + Sync),
        opts: &QuadOptions,
    ) -> Result<Vec<StarIntegral>> {
        let inv = inv_ln2_enclosure(JET_BITS);
        let terms = self.terms();
        let spread = 64 - (terms.len() as u64).leading_zeros();
        let mut out: Vec<StarIntegral> = (2..=self.truncation)
            .map(|_| StarIntegral { enclosure: Interval::zero(), converged: true, subdivisions: 0 })
            .collect();
        for t in &terms {
            let tol = opts.tol.checked_div(&t.coef.max_abs().max(Rational::pow2(-64)))?.shl(-(spread as i64));
            let piece = Piece::new(t.lo.clone(), t.hi.clone(), |x: &Jet| Ok(t.basis_jet(x, &inv)?.mul(&h(x)?)));
            let r = integrate(&[piece], &QuadOptions { tol, budget: opts.budget })?;
            let slot = &mut out[(t.lo.floor().try_into().unwrap_or(2u64) - 2) as usize];
            slot.converged &= r.converged;
            slot.subdivisions += r.subdivisions;
            slot.enclosure = (&slot.enclosure + &(&t.coef * &r.enclosure)).round_out(JET_BITS);
        }
        Ok(out)
    }

    /// Encloses `int_0^inf h(a) f*_T(a) da`; `h` must be smooth on each unit interval of `[2, T+1]`.
    pub fn integrate_against(
        &self,
        h: &(dyn Fn(&Jet) -> Result<Jet> + Send + Sync),
        opts: &QuadOptions,
    ) -> Result<StarIntegral> {
        let units = self.unit_integrals(h, opts)?;
        Ok(StarIntegral {
            enclosure: units.iter().map(|u| u.enclosure.clone()).sum::<Interval>().round_out(JET_BITS),
            converged: units.iter().all(|u| u.converged),
            subdivisions: units.iter().map(|u| u.subdivisions).sum(),
        })
    }

    /// `4 int_1^inf log2(a) f*_T = (2/c2) sum_{M=4..T} 2^-phi(M)`.
    pub fn log_moment_truncated(&self) -> Interval {
        let s: Rational = self.weights.iter().cloned().sum();
        self.c2.recip().expect("c2 > 0").scale(&s.shl(1))
    }

    pub fn descriptor(&self) -> super::PdfDescriptor {
        super::PdfDescriptor::Star(StarDescriptor {
            enumerator: self.enumerator().label().to_string(),
            enumerator_hash: self.enumerator().content_hash(),
            truncation: self.truncation,
            bits: self.bits,
            km: self.km.clone(),
            c2: self.c2.clone(),
            tail_bound: self.mass_tail(),
        })
    }
}

/// Shape of one smooth term of `f*_T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StarBasis {
    /// `a - lo` on `[lo, lo + 1]`.
    Rise,
    /// `hi - a` on `[hi - 1, hi]`.
    Fall,
    /// `1 / (a log2^2 a)`.
    InvLogSq,
}

#[derive(Clone, Debug)]
pub struct StarTerm {
    pub lo: Rational,
    pub hi: Rational,
    pub coef: Interval,
    pub basis: StarBasis,
}

impl StarTerm {
    /// The basis function on `[lo, hi]`, without the coefficient.
    pub fn basis_jet(&self, x: &Jet, inv_ln2: &Interval) -> Result<Jet> {
        match self.basis {
            StarBasis::Rise => Ok(x.add_const(&-&self.lo)),
            StarBasis::Fall => Ok(x.scale(&-Rational::one()).add_const(&self.hi)),
            StarBasis::InvLogSq => x.mul(&x.log2(inv_ln2)?.sqr()).recip(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct StarIntegral {
    pub enclosure: Interval,
    pub converged: bool,
    pub subdivisions: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct StarDescriptor {
    pub enumerator: String,
    pub enumerator_hash: String,
    pub truncation: u64,
    pub bits: u32,
    pub km: Vec<Interval>,
    pub c2: Interval,
    pub tail_bound: Rational,
}

/// Builds `f*` truncated after `M = truncation`.
pub fn build_star_pdf(r: &REEnumerator, truncation: u64, opts: &StarOptions) -> Result<StarPdf> {
    if truncation < FIRST_INDEX + 1 {
        return Err(Error::Validation(format!("star truncation must be >= 5, got {truncation}")));
    }
    let bits = opts.bits;
    let specker = SpeckerNumber::new(r.clone());
    let weights: Vec<Rational> = (FIRST_INDEX..=truncation).map(|m| specker.weight(m)).collect::<Result<_>>()?;
    let km: Vec<Interval> = (FIRST_INDEX..=truncation + 1).map(|m| km_enclosure(m, bits)).collect::<Result<_>>()?;
    let coef: Vec<Interval> = weights
        .iter()
        .zip(&km)
        .map(|(w, k)| k.recip().map(|v| v.scale(w).round_out(bits + 16)))
        .collect::<Result<_>>()?;
    let residual = specker.residual_bound(truncation)?;
    let k_next = km.last().expect("nonempty").lo().clone();
    let l1_tail = gm_integral_bound(bits).scale(&residual.checked_div(&k_next)?);
    let point_tail = c1(bits).scale(&residual.checked_div(&k_next)?);
    let mut mass = Interval::zero();
    for (m, c) in (FIRST_INDEX..).zip(&coef) {
        mass = &mass + &(c * &gm_integral(m, bits + 8)?);
    }
    let c2 = Interval::new(mass.lo().clone(), mass.hi() + l1_tail.hi())?;
    if let Some(max) = &opts.max_l1_tail {
        if l1_tail.hi() > max {
            return Err(Error::TailTooLarge { tail: l1_tail.hi().to_decimal(12), allowed: max.to_decimal(12) });
        }
    }
    Ok(StarPdf { specker, truncation, bits, weights, km, coef, residual, c2, l1_tail, point_tail })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ln_enclosure;

    fn q(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    #[test]
    fn gm_values() {
        assert_eq!(eval_gm(8, &q(1, 1), 30).unwrap(), Interval::zero());
        assert_eq!(eval_gm(8, &q(9, 1), 30).unwrap(), Interval::zero());
        assert!(eval_gm(8, &q(4, 1), 30).unwrap().contains(&q(1, 16)));
        assert!(eval_gm(3, &q(4, 1), 30).is_err());
        // continuity at the joints
        for m in [4u64, 9, 30] {
            let left = eval_gm(m, &Rational::from(m), 40).unwrap();
            let right = eval_gm(m, &(Rational::from(m) + q(1, 1 << 30)), 40).unwrap();
            assert!((&left - &right).max_abs() < Rational::pow2(-20));
        }
        let c = c1(40);
        let at3 = eval_gm(10, &q(3, 1), 40).unwrap();
        assert!((&c - &at3).max_abs() < Rational::pow2(-36));
    }

    #[test]
    fn km_matches_closed_form_and_grows() {
        // independent closed form: c1/2 + ln2 ln(ln M / ln 3) + int_M^{M+1} ramp * log2
        let k4 = km_enclosure(4, 24).unwrap();
        let mut prev = k4.clone();
        for m in 5..=24u64 {
            let k = km_enclosure(m, 24).unwrap();
            assert!(k.lo() > prev.hi());
            assert!(k.lo() > k4.hi());
            let loglog = ln_enclosure(&(ln_enclosure(&Rational::from(m), 40).unwrap().mid()), 40).unwrap();
            let ll3 = ln_enclosure(&ln_enclosure(&q(3, 1), 40).unwrap().mid(), 40).unwrap();
            let mid = &(&loglog - &ll3) * &ln2_enclosure(40);
            let lower = &c1(30).scale(&q(1, 2)) + &mid;
            assert!(k.lo() > lower.hi(), "m={m}");
            // ramp term is below 1/(2M log2 M) * log2(M+1)/log2 M < 1/M
            assert!(k.hi() < &(lower.hi() + &q(1, m as i64)));
            prev = k;
        }
    }

    #[test]
    fn gm_integral_matches_quadrature() {
        let inv = inv_ln2_enclosure(60);
        for m in [4u64, 7, 16] {
            let closed = gm_integral(m, 30).unwrap();
            let mq = Rational::from(m);
            let c1v = c1(40);
            let ramp = log2_sq(&mq, 40).unwrap().scale(&mq).recip().unwrap();
            let m1 = &mq + &Rational::one();
            let pieces = vec![
                Piece::new(q(2, 1), q(3, 1), move |x: &Jet| Ok(x.add_const(&q(-2, 1)).scale_interval(&c1v))),
                Piece::new(q(3, 1), mq.clone(), |x: &Jet| x.mul(&x.log2(&inv)?.sqr()).recip()),
                Piece::new(mq.clone(), m1.clone(), move |x: &Jet| {
                    Ok(x.scale(&-Rational::one()).add_const(&m1).scale_interval(&ramp))
                }),
            ];
            let r = integrate(&pieces, &quad_opts(24)).unwrap();
            assert!(r.enclosure.intersect(&closed).is_some(), "m={m}");
            assert!(closed.hi() <= gm_integral_bound(30).hi());
        }
    }

    #[test]
    fn star_pdf_identity_enumerator() {
        let p = build_star_pdf(&REEnumerator::identity(), 12, &StarOptions::default()).unwrap();
        assert_eq!(p.eval(&q(1, 2)).unwrap(), Interval::zero());
        assert_eq!(p.eval(&q(-3, 2)).unwrap(), Interval::zero());
        assert_eq!(p.eval(&q(7, 2)).unwrap(), p.eval(&q(-7, 2)).unwrap());
        assert!(p.eval(&q(7, 2)).unwrap().lo() >= &Rational::zero());
        // identity enumerator: R_T = 2^-T
        assert_eq!(p.residual(), &Rational::pow2(-12));

        let one = |_: &Jet| Ok(Jet::constant(Interval::point(Rational::one())));
        let half = p.integrate_against(&one, &quad_opts(22)).unwrap();
        assert!(half.converged);
        let mass = half.enclosure.scale(&Rational::from(2i64));
        let tau = p.mass_tail();
        assert!(mass.lo() <= &(Rational::one() + Rational::pow2(-18)));
        assert!((mass.hi() + &tau) >= (Rational::one() - Rational::pow2(-18)));

        // log-moment: 4 int log2(a) f*_T against (2/c2) sum 2^-M over M = 4..T
        let inv = inv_ln2_enclosure(80);
        let lg = move |x: &Jet| x.log2(&inv);
        let lm = p.integrate_against(&lg, &quad_opts(22)).unwrap().enclosure.scale(&Rational::from(4i64));
        let direct: Rational = (4..=12).map(|m| Rational::pow2(-m)).sum();
        let expect = p.c2().recip().unwrap().scale(&direct.shl(1));
        // both sides inherit the width of c2, which carries the L1 tail
        assert!(lm.intersect(&expect).is_some(), "{lm} vs {expect}");
        assert!(lm.width() < &(expect.width().shl(1)) + &Rational::pow2(-14));
        assert!(p.log_moment_truncated().contains(&(expect.mid())));
    }

    #[test]
    fn star_rejects_small_truncation() {
        assert!(build_star_pdf(&REEnumerator::identity(), 4, &StarOptions::default()).is_err());
        let opts = StarOptions { bits: 20, max_l1_tail: Some(Rational::pow2(-40)) };
        assert!(matches!(build_star_pdf(&REEnumerator::identity(), 6, &opts), Err(Error::TailTooLarge { .. })));
    }
}
