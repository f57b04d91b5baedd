//! The effective tail of `x_m = int_1^m log2(1 + sigma^2 / (P a^2)) f*(a) da`.
//!
//! `x_m` is computed for the truncated `f*_T` and widened by the truncation
//! slack `sup k * mass(f* - f*_T) / 2`, so each enclosure holds `x_m` for `f*`
//! itself. Past `m`, `k(a) <= k(m)` and `f*` has at most mass `1/2` on `a > 0`.

use serde::Serialize;

use crate::constructions::StarPdf;
use crate::error::{Error, Result};
use crate::exact::{Interval, Rational};
use crate::quad::{Jet, QuadOptions, JET_BITS};

use super::kernel::{snr, Kernel};

#[derive(Clone, Debug, Serialize)]
pub struct Lemma2Table {
    pub power: Rational,
    pub sigma_sq: Rational,
    pub m_max: u64,
    /// `x_m` for `m = 2..=m_max`, indexed by `m - 2`.
    pub x: Vec<Interval>,
    /// Bound on `x* - x_{m_max}`.
    pub tail: Rational,
}

impl Lemma2Table {
    pub fn x(&self, m: u64) -> &Interval {
        &self.x[(m - 2) as usize]
    }

    /// Certified upper bound on `x*`.
    pub fn limit_upper(&self) -> Rational {
        self.x(self.m_max).hi() + &self.tail
    }

    /// `(x_{m_max} + tail) - x_m`, an upper bound on `x* - x_m`.
    pub fn gap(&self, m: u64) -> Rational {
        self.limit_upper() - self.x(m).lo()
    }

    /// `sigma^2 / (m P)`.
    pub fn rate(&self, m: u64) -> Rational {
        self.sigma_sq.checked_div(&(&self.power * &Rational::from(m))).expect("P > 0")
    }
}

pub fn lemma2_table(
    star: &StarPdf,
    power: &Rational,
    sigma_sq: &Rational,
    m_max: u64,
    opts: &QuadOptions,
) -> Result<Lemma2Table> {
    if m_max < 2 {
        return Err(Error::Validation(format!("x_m needs m > 1, got {m_max}")));
    }
    let k = Kernel::Gap { snr: snr(power, sigma_sq)? };
    let inv = crate::exact::inv_ln2_enclosure(JET_BITS);
    let h = |x: &Jet| k.jet(x, &inv);
    let units = star.unit_integrals(&h, opts)?;
    if let Some(u) = units.iter().find(|u| !u.converged) {
        return Err(Error::PrecisionCap {
            requested_bits: (-opts.tol.floor_log2().unwrap_or(0)).max(0) as u32,
            achievable_bits: (-u.enclosure.width().floor_log2().unwrap_or(0)).max(0) as u32,
            reason: "quadrature budget exhausted on a unit interval of f*".into(),
        });
    }
    let half = Rational::frac(1, 2);
    let slack = &(&k.sup_from(&Rational::from(2i64), JET_BITS)? * &star.mass_tail()) * &half;
    let mut x = Vec::with_capacity(m_max as usize - 1);
    let mut acc = Interval::zero();
    for m in 2..=m_max {
        // unit interval [m - 1, m] sits at index m - 3
        if m >= 3 {
            if let Some(u) = units.get(m as usize - 3) {
                acc = &acc + &u.enclosure;
            }
        }
        x.push(Interval::new(acc.lo().clone(), acc.hi() + &slack)?);
    }
    let tail = &k.sup_from(&Rational::from(m_max), JET_BITS)? * &half;
    Ok(Lemma2Table { power: power.clone(), sigma_sq: sigma_sq.clone(), m_max, x, tail })
}

/// `x_m` for `f*`, as an enclosure.
pub fn lemma2_x(star: &StarPdf, power: &Rational, sigma_sq: &Rational, m: u64, opts: &QuadOptions) -> Result<Interval> {
    Ok(lemma2_table(star, power, sigma_sq, m, opts)?.x(m).clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{build_star_pdf, StarOptions};
    use crate::hierarchy::REEnumerator;

    #[test]
    fn monotone_and_rate_bounded() {
        let star = build_star_pdf(&REEnumerator::identity(), 16, &StarOptions::default()).unwrap();
        let opts = QuadOptions { tol: Rational::pow2(-24), budget: 1 << 16 };
        let mut prev: Option<Lemma2Table> = None;
        for p in [1i64, 10, 100] {
            let t = lemma2_table(&star, &Rational::from(p), &Rational::one(), 40, &opts).unwrap();
            for m in 3..=40 {
                assert!(t.x(m).lo() >= t.x(m - 1).lo());
            }
            for m in 4..=40 {
                assert!(t.gap(m) < t.rate(m), "P={p} m={m}");
            }
            if let Some(q) = prev {
                assert!(t.x(20).hi() < q.x(20).lo());
            }
            prev = Some(t);
        }
        assert!(lemma2_x(&star, &Rational::one(), &Rational::one(), 1, &opts).is_err());
    }
}
