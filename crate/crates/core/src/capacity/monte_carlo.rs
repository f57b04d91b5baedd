//! Inverse-CDF sampling of `|a|` and a Monte-Carlo cross-check of the capacity integrals.
//!
//! Sample `i` consumes counters `2i` (component) and `2i + 1` (position) of the
//! counter generator keyed by the seed, and batches are merged in index order,
//! so the estimate does not depend on how batches are scheduled.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::rng::CounterRng;

use super::fading::Fading;
use super::kernel::{snr, Kernel};

/// Largest certified tail mass accepted for sampling.
pub const MAX_SAMPLING_TAIL: f64 = 1e-6;

const BATCH: u64 = 1 << 15;
const SQRT_BITS: u32 = 64;

fn q(n: i64, d: i64) -> Rational {
    Rational::frac(n, d)
}

/// CDF of the normalised bump `2 g` on `[1, 4]`.
fn bump_cdf(t: &Rational) -> Rational {
    let one = Rational::one();
    if t <= &one {
        return Rational::zero();
    }
    if t <= &Rational::from(2i64) {
        let d = t - &one;
        return (&d * &d).shl(-2);
    }
    if t <= &Rational::from(3i64) {
        return &q(1, 4) + &(t - &Rational::from(2i64)).shl(-1);
    }
    if t < &Rational::from(4i64) {
        let d = &Rational::from(4i64) - t;
        return &one - &(&d * &d).shl(-2);
    }
    one
}

/// `floor(sqrt(u) 2^64) / 2^64`.
fn sqrt_floor(u: &Rational) -> Rational {
    let scaled = u.shl(2 * SQRT_BITS as i64).floor();
    Rational::from_int(scaled.sqrt()).shl(-(SQRT_BITS as i64))
}

/// Inverse of [`bump_cdf`], exact up to a `2^-63` square-root truncation.
fn bump_inverse(u: &Rational) -> Rational {
    if u < &q(1, 4) {
        &Rational::one() + &sqrt_floor(u).shl(1)
    } else if u < &q(3, 4) {
        &u.shl(1) + &q(3, 2)
    } else {
        &Rational::from(4i64) - &sqrt_floor(&(&Rational::one() - u)).shl(1)
    }
}

/// Mixture of shifted bumps with exact rational shifts and normalised weights.
#[derive(Clone, Debug)]
struct Mixture {
    shifts: Vec<Rational>,
    weights: Vec<Rational>,
}

impl Mixture {
    fn of(pdf: &Fading) -> Result<Mixture> {
        match pdf {
            Fading::Bump { shift } => Ok(Mixture { shifts: vec![shift.clone()], weights: vec![Rational::one()] }),
            Fading::Train(p) => {
                let raw: Vec<Rational> = (1..=p.terms()).map(|n| p.weight(n).mid()).collect();
                let total: Rational = raw.iter().cloned().sum();
                Ok(Mixture {
                    shifts: (1..=p.terms()).map(|n| p.alpha_star(n).mid()).collect(),
                    weights: raw.iter().map(|w| w.checked_div(&total)).collect::<Result<_>>()?,
                })
            }
            Fading::Star(_) => Err(Error::Validation(
                "inverse-CDF sampling needs piecewise-linear segments; the star density has none".into(),
            )),
        }
    }

    fn cdf(&self, a: &Rational) -> Rational {
        self.shifts.iter().zip(&self.weights).map(|(s, w)| w * &bump_cdf(&(a - s))).sum()
    }
}

/// CDF of `|a|` under the retained part of `pdf`, normalised to mass 1.
pub fn abs_cdf(pdf: &Fading, a: &Rational) -> Result<Rational> {
    Ok(Mixture::of(pdf)?.cdf(a))
}

/// `a >= 0` with `CDF(a) = u` for the law of `|a|`. Single bumps are inverted per
/// segment in closed form, mixtures by bisection to `2^-48`.
pub fn sample_inverse_cdf(pdf: &Fading, u: &Rational) -> Result<Rational> {
    if u.is_negative() || u >= &Rational::one() {
        return Err(Error::Validation(format!("u must lie in [0, 1), got {u}")));
    }
    let m = Mixture::of(pdf)?;
    if m.shifts.len() == 1 {
        return Ok(&m.shifts[0] + &bump_inverse(u));
    }
    let mut lo = &m.shifts[0] + &Rational::one();
    let mut hi = m.shifts.iter().max().expect("nonempty") + &Rational::from(4i64);
    let eps = Rational::pow2(-48);
    while &hi - &lo > eps {
        let mid = (&lo + &hi).shl(-1).dyadic_floor(60);
        if &m.cdf(&mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    /// Half-width of the normal-approximation 95% interval.
    pub ci95: f64,
    pub samples: u64,
    pub seed: u64,
}

fn unit_f64(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn bump_inverse_f64(u: f64) -> f64 {
    if u < 0.25 {
        1.0 + 2.0 * u.sqrt()
    } else if u < 0.75 {
        2.0 * u + 1.5
    } else {
        4.0 - 2.0 * (1.0 - u).sqrt()
    }
}

/// `(count, mean, M2)` merged with Chan's update.
fn merge(a: (f64, f64, f64), b: (f64, f64, f64)) -> (f64, f64, f64) {
    let n = a.0 + b.0;
    if n == 0.0 {
        return a;
    }
    let d = b.1 - a.1;
    (n, a.1 + d * b.0 / n, a.2 + b.2 + d * d * a.0 * b.0 / n)
}

/// Mean of `log2(1 + P a^2 / sigma^2)` over `samples` draws from `pdf`.
pub fn mc_estimate(pdf: &Fading, power: &Rational, sigma_sq: &Rational, samples: u64, seed: u64) -> Result<McEstimate> {
    if samples == 0 {
        return Err(Error::Validation("Monte-Carlo needs at least one sample".into()));
    }
    let tail = pdf.tail_mass();
    if tail.to_f64() > MAX_SAMPLING_TAIL {
        return Err(Error::TailTooLarge { tail: tail.to_decimal(12), allowed: format!("{MAX_SAMPLING_TAIL:e}") });
    }
    let kernel = Kernel::Capacity { snr: snr(power, sigma_sq)? };
    let m = Mixture::of(pdf)?;
    let shifts: Vec<f64> = m.shifts.iter().map(Rational::to_f64).collect();
    let mut cum = Vec::with_capacity(m.weights.len());
    let mut acc = 0.0;
    for w in &m.weights {
        acc += w.to_f64();
        cum.push(acc);
    }
    let batches = samples.div_ceil(BATCH);
    let parts: Vec<(f64, f64, f64)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut st = (0.0, 0.0, 0.0);
            for i in b * BATCH..((b + 1) * BATCH).min(samples) {
                let pick = unit_f64(CounterRng::draw(seed, 2 * i)) * acc;
                let j = cum.partition_point(|c| *c <= pick).min(shifts.len() - 1);
                let t = bump_inverse_f64(unit_f64(CounterRng::draw(seed, 2 * i + 1)));
                let v = kernel.eval_f64(shifts[j] + t);
                st = merge(st, (1.0, v, 0.0));
            }
            st
        })
        .collect();
    let (n, mean, m2) = parts.into_iter().fold((0.0, 0.0, 0.0), merge);
    let var = if n > 1.0 { m2 / (n - 1.0) } else { 0.0 };
    let std_err = (var / n).sqrt();
    Ok(McEstimate { mean, std_err, ci95: 1.96 * std_err, samples, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::capacity_opts;
    use proptest::prelude::*;

    #[test]
    fn edges_and_median() {
        let f = Fading::bump(q(5, 2)).unwrap();
        assert_eq!(sample_inverse_cdf(&f, &Rational::zero()).unwrap(), q(7, 2));
        assert_eq!(sample_inverse_cdf(&f, &q(1, 2)).unwrap(), q(5, 1));
        assert!(sample_inverse_cdf(&f, &Rational::one()).is_err());
        assert!(sample_inverse_cdf(&f, &q(-1, 3)).is_err());
    }

    proptest! {
        #[test]
        fn cdf_round_trip(num in 0u64..(1 << 40), shift in 0u32..8) {
            let f = Fading::bump(q(shift as i64, 2)).unwrap();
            let u = Rational::from(num).shl(-40);
            let a = sample_inverse_cdf(&f, &u).unwrap();
            let back = abs_cdf(&f, &a).unwrap();
            prop_assert!((&back - &u).abs() <= Rational::pow2(-30));
        }
    }

    #[test]
    fn deterministic_and_close_to_quadrature() {
        let f = Fading::bump(q(3, 2)).unwrap();
        let one = Rational::one();
        let a = mc_estimate(&f, &one, &one, 200_000, 7).unwrap();
        let b = mc_estimate(&f, &one, &one, 200_000, 7).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.ci95.to_bits(), b.ci95.to_bits());
        let quad = f
            .integrate(&Kernel::Capacity { snr: one.clone() }, None, &capacity_opts())
            .unwrap()
            .enclosure
            .mid()
            .to_f64();
        assert!((a.mean - quad).abs() < 3.0 * a.std_err, "{} vs {quad}", a.mean);
        assert!(mc_estimate(&f, &one, &one, 0, 7).is_err());
    }
}
