//! Channels, truncated capacity terms and Δ₂ capacity certificates.
//!
//! `C_S = a - b` with `a = int log2(1 + P a^2 / s1) f1` and `b` likewise for the
//! eavesdropper. `a_n`, `b_n` keep the pieces of `f1`, `f2` that fit inside
//! `[-n, n]`; their lower endpoints are nondecreasing in `n`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{Interval, Rational};
use crate::hierarchy::{Delta2Cert, Sigma1Cert};
use crate::quad::{QuadOptions, QuadratureResult};

use super::fading::Fading;
use super::kernel::{snr, Kernel};

/// Default quadrature width for capacity terms.
pub const CAPACITY_TOL_BITS: i64 = 22;

pub fn capacity_opts() -> QuadOptions {
    QuadOptions { tol: Rational::pow2(-CAPACITY_TOL_BITS), budget: 1 << 16 }
}

/// A fast-fading Gaussian wiretap channel with receiver CSI.
#[derive(Clone, Debug)]
pub struct Channel {
    pub f1: Fading,
    pub f2: Fading,
    pub sigma1_sq: Rational,
    pub sigma2_sq: Rational,
    pub power: Rational,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChannelSummary {
    pub f1: String,
    pub f2: String,
    pub sigma1_sq: Rational,
    pub sigma2_sq: Rational,
    pub power: Rational,
}

impl Channel {
    pub fn new(f1: Fading, f2: Fading, sigma1_sq: Rational, sigma2_sq: Rational, power: Rational) -> Result<Channel> {
        snr(&power, &sigma1_sq)?;
        snr(&power, &sigma2_sq)?;
        Ok(Channel { f1, f2, sigma1_sq, sigma2_sq, power })
    }

    pub fn bob_kernel(&self) -> Kernel {
        Kernel::Capacity { snr: snr(&self.power, &self.sigma1_sq).expect("validated") }
    }

    pub fn eve_kernel(&self) -> Kernel {
        Kernel::Capacity { snr: snr(&self.power, &self.sigma2_sq).expect("validated") }
    }

    pub fn summary(&self) -> ChannelSummary {
        ChannelSummary {
            f1: self.f1.label(),
            f2: self.f2.label(),
            sigma1_sq: self.sigma1_sq.clone(),
            sigma2_sq: self.sigma2_sq.clone(),
            power: self.power.clone(),
        }
    }
}

/// Encloses `int_{-r}^{r} log2(1 + P a^2 / sigma^2) f(a) da` over the pieces of `f`
/// inside the radius. Depends on `(P, sigma^2)` only through `P / sigma^2`.
pub fn quad_capacity_term(
    pdf: &Fading,
    power: &Rational,
    sigma_sq: &Rational,
    radius: u64,
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    let k = Kernel::Capacity { snr: snr(power, sigma_sq)? };
    let r = pdf.integrate(&k, Some(&Rational::from(radius)), opts)?;
    Ok(QuadratureResult {
        radius: r.enclosure.width(),
        enclosure: r.enclosure,
        subdivisions: r.subdivisions,
        converged: r.converged,
    })
}

/// Certified lower representatives of `(a_n, b_n)`.
pub fn capacity_truncations(ch: &Channel, n: u64) -> Result<(Rational, Rational)> {
    if n == 0 {
        return Err(Error::Validation("truncation radius must be at least 1".into()));
    }
    let r = Rational::from(n);
    let opts = capacity_opts();
    let a = ch.f1.integrate(&ch.bob_kernel(), Some(&r), &opts)?;
    let b = ch.f2.integrate(&ch.eve_kernel(), Some(&r), &opts)?;
    Ok((a.enclosure.lo().clone(), b.enclosure.lo().clone()))
}

/// `a_seq`, `b_seq` and their difference as certificates.
#[derive(Clone, Debug)]
pub struct CapacityCertificate {
    pub channel: ChannelSummary,
    pub a_seq: Sigma1Cert,
    pub b_seq: Sigma1Cert,
    pub as_delta2: Delta2Cert,
    /// `u(P)` for the retained pieces, when the decomposition has been run.
    pub u_correction: Option<Interval>,
}

/// Crude majorant `log2(1 + c) + int log2(a^2) f`, from `1 + c a^2 <= (1 + c) a^2` on `|a| >= 1`.
fn term_bound(f: &Fading, k: &Kernel) -> u64 {
    let one_c = k.snr() + &Rational::one();
    let lc = one_c.floor_log2().expect("positive") + 1;
    let lm = f.log_moment_bound().ceil();
    let lm: i64 = lm.try_into().unwrap_or(i64::MAX / 2);
    (lc + lm).max(1) as u64
}

fn sequence(label: String, f: Fading, k: Kernel, opts: QuadOptions) -> Sigma1Cert {
    let bound = term_bound(&f, &k);
    let cache: Arc<Mutex<HashMap<u64, Rational>>> = Arc::default();
    Sigma1Cert::new(label, bound, move |n| {
        if n == 0 {
            return Rational::zero();
        }
        if let Some(v) = cache.lock().expect("cache poisoned").get(&n) {
            return v.clone();
        }
        let v = f
            .integrate(&k, Some(&Rational::from(n)), &opts)
            .unwrap_or_else(|e| panic!("capacity term at radius {n}: {e}"))
            .enclosure
            .lo()
            .clone();
        cache.lock().expect("cache poisoned").insert(n, v.clone());
        v
    })
}

pub fn capacity_certificate(ch: &Channel) -> CapacityCertificate {
    capacity_certificate_with(ch, &capacity_opts())
}

/// As [`capacity_certificate`], with every term computed under `opts`.
pub fn capacity_certificate_with(ch: &Channel, opts: &QuadOptions) -> CapacityCertificate {
    let a_seq = sequence(format!("a[{}]", ch.f1.label()), ch.f1.clone(), ch.bob_kernel(), opts.clone());
    let b_seq = sequence(format!("b[{}]", ch.f2.label()), ch.f2.clone(), ch.eve_kernel(), opts.clone());
    CapacityCertificate {
        channel: ch.summary(),
        as_delta2: Delta2Cert::new(a_seq.clone(), b_seq.clone()),
        a_seq,
        b_seq,
        u_correction: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::delta2_anytime;

    fn q(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    #[test]
    fn ratio_invariance_is_exact() {
        let f = Fading::bump(q(3, 2)).unwrap();
        let o = capacity_opts();
        let base = quad_capacity_term(&f, &q(3, 1), &q(2, 1), 8, &o).unwrap();
        for c in [2i64, 10] {
            let c = Rational::from(c);
            let s = quad_capacity_term(&f, &(&q(3, 1) * &c), &(&q(2, 1) * &c), 8, &o).unwrap();
            assert_eq!(s.enclosure, base.enclosure);
        }
    }

    #[test]
    fn symmetric_channel_is_null() {
        let f = Fading::bump(q(1, 1)).unwrap();
        let ch = Channel::new(f.clone(), f, q(1, 1), q(1, 1), q(5, 1)).unwrap();
        let cert = capacity_certificate(&ch);
        for k in 0..=8 {
            assert!(delta2_anytime(&cert.as_delta2, k).is_zero());
        }
        assert_eq!(capacity_truncations(&ch, 1).unwrap(), (Rational::zero(), Rational::zero()));
        assert!(Channel::new(
            Fading::bump(q(0, 1)).unwrap(),
            Fading::bump(q(0, 1)).unwrap(),
            q(0, 1),
            q(1, 1),
            q(1, 1)
        )
        .is_err());
    }

    #[test]
    fn bound_majorises_the_terms() {
        let f = Fading::bump(q(2, 1)).unwrap();
        let ch = Channel::new(f.clone(), f, q(1, 1), q(4, 1), q(7, 1)).unwrap();
        let cert = capacity_certificate(&ch);
        assert!(cert.a_seq.check(10).is_ok());
        assert!(cert.b_seq.check(10).is_ok());
        assert!(cert.a_seq.term(10) > cert.b_seq.term(10));
    }
}
