//! `C_S = x + u(P)` on truncated bump trains.
//!
//! Three independent routes over the same retained bumps:
//! the capacity integrals `int log2(1 + c a^2) f_i`, the log-moments
//! `int log2(a^2) f_i` through `Psi(alpha*_n)`, and the excess integrals
//! `z_i = int log2(c + a^-2) f_i`. Pointwise `log2(1 + c a^2) = log2(a^2) + log2(c + a^-2)`,
//! so `(x + z_1 - z_2) - capacity` vanishes up to the widths of the six enclosures.

use serde::Serialize;

use crate::constructions::{build_bump_train, BumpTrainOptions, BumpTrainPdf};
use crate::error::Result;
use crate::exact::{Interval, Rational};
use crate::hierarchy::Sigma1Cert;
use crate::quad::QuadOptions;

use super::channel::capacity_opts;
use super::fading::Fading;
use super::kernel::{snr, Kernel};

#[derive(Clone, Debug, Serialize)]
pub struct Theorem1Report {
    pub x1: String,
    pub x2: String,
    pub power: Rational,
    pub sigma1_sq: Rational,
    pub sigma2_sq: Rational,
    pub k: u64,
    pub capacity_1: Interval,
    pub capacity_2: Interval,
    pub log_moment_1: Interval,
    pub log_moment_2: Interval,
    pub excess_1: Interval,
    pub excess_2: Interval,
    /// `x1.term(k) - x2.term(k)`, which the log-moment route reproduces.
    pub x_partial: Rational,
    /// `x1 - x2` from the declared tails, when both certificates declare one.
    pub x_limit: Option<Interval>,
    /// Lower endpoints, as the Δ₂ anytime estimate.
    pub capacity_estimate: Rational,
    /// Midpoint difference of the log-moments.
    pub x_estimate: Rational,
    /// `capacity_estimate - x_estimate`.
    pub u_estimate: Rational,
    /// `z1 - z2`, midpoints.
    pub u_independent: Rational,
    /// `(x_estimate + u_independent) - capacity_estimate`.
    pub residual: Rational,
    /// Sum of the six enclosure widths.
    pub combined_error: Rational,
    pub passed: bool,
}

impl Theorem1Report {
    /// `z1 - z2` as an enclosure.
    pub fn u_enclosure(&self) -> Interval {
        &self.excess_1 - &self.excess_2
    }
}

fn train(x: &Sigma1Cert, k: u64) -> Result<BumpTrainPdf> {
    build_bump_train(x, k, &BumpTrainOptions::default())
}

/// Runs the decomposition with `k` bumps per density.
pub fn theorem1_check(
    x1: &Sigma1Cert,
    x2: &Sigma1Cert,
    power: &Rational,
    s1: &Rational,
    s2: &Rational,
    k: u64,
) -> Result<Theorem1Report> {
    theorem1_check_with(x1, x2, power, s1, s2, k, &capacity_opts())
}

pub fn theorem1_check_with(
    x1: &Sigma1Cert,
    x2: &Sigma1Cert,
    power: &Rational,
    s1: &Rational,
    s2: &Rational,
    k: u64,
    opts: &QuadOptions,
) -> Result<Theorem1Report> {
    let c1 = snr(power, s1)?;
    let c2 = snr(power, s2)?;
    let p1 = train(x1, k)?;
    let p2 = train(x2, k)?;
    let lm1 = p1.log_moment_truncated()?;
    let lm2 = p2.log_moment_truncated()?;
    let f1 = Fading::Train(p1.into());
    let f2 = Fading::Train(p2.into());
    let cap1 = f1.integrate(&Kernel::Capacity { snr: c1.clone() }, None, opts)?.enclosure;
    let cap2 = f2.integrate(&Kernel::Capacity { snr: c2.clone() }, None, opts)?.enclosure;
    let z1 = f1.integrate(&Kernel::Excess { snr: c1 }, None, opts)?.enclosure;
    let z2 = f2.integrate(&Kernel::Excess { snr: c2 }, None, opts)?.enclosure;

    let capacity_estimate = cap1.lo() - cap2.lo();
    let x_estimate = lm1.mid() - lm2.mid();
    let u_independent = z1.mid() - z2.mid();
    let residual = &(&x_estimate + &u_independent) - &capacity_estimate;
    let combined_error = [&cap1, &cap2, &lm1, &lm2, &z1, &z2].iter().map(|i| i.width()).sum::<Rational>();
    let x_limit = match (x1.declared_tail(k), x2.declared_tail(k)) {
        (Some(t1), Some(t2)) => {
            let a = Interval::new(x1.term(k), x1.term(k) + t1)?;
            let b = Interval::new(x2.term(k), x2.term(k) + t2)?;
            Some(&a - &b)
        }
        _ => None,
    };
    Ok(Theorem1Report {
        x1: x1.label().to_string(),
        x2: x2.label().to_string(),
        power: power.clone(),
        sigma1_sq: s1.clone(),
        sigma2_sq: s2.clone(),
        k,
        x_partial: x1.term(k) - x2.term(k),
        x_limit,
        u_estimate: &capacity_estimate - &x_estimate,
        passed: residual.abs() <= combined_error,
        capacity_1: cap1,
        capacity_2: cap2,
        log_moment_1: lm1,
        log_moment_2: lm2,
        excess_1: z1,
        excess_2: z2,
        capacity_estimate,
        x_estimate,
        u_independent,
        residual,
        combined_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn full_symmetry_gives_zero() {
        let x = fixtures::geo_quarter();
        let one = Rational::one();
        let r = theorem1_check(&x, &x, &Rational::from(3i64), &one, &one, 6).unwrap();
        assert!(r.capacity_estimate.is_zero());
        assert!(r.u_estimate.is_zero());
        assert!(r.residual.is_zero());
        assert!(r.passed);
    }

    #[test]
    fn single_term_reduces_to_two_integrals() {
        // a lone d_1 must keep z* M(1) / 2 above Psi(0)
        let x1 = Sigma1Cert::new("three", 4, |k| if k == 0 { Rational::zero() } else { Rational::from(3i64) })
            .with_tail(|k| if k == 0 { Rational::from(3i64) } else { Rational::zero() });
        let x2 = fixtures::geo_quarter();
        let one = Rational::one();
        let r = theorem1_check(&x1, &x2, &one, &one, &one, 4).unwrap();
        assert!(r.passed, "{r:?}");
        // z1 = int log2(1 + a^2) f1 - int log2(a^2) f1, the second via Psi
        let z1 = &r.capacity_1 - &r.log_moment_1;
        assert!(z1.intersect(&r.excess_1).is_some());
        assert!(r.log_moment_1.contains(&Rational::from(3i64)));
        assert!(r.x_limit.unwrap().contains(&Rational::frac(-1, 2)));
    }
}
