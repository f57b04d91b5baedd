//! Integrands of the capacity functionals and their integrals against one shifted bump.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use serde::Serialize;

use crate::constructions::{g_jet, g_pieces};
use crate::error::{Error, Result};
use crate::exact::{inv_ln2_enclosure, Interval, Rational};
use crate::quad::{integrate, Jet, Piece, QuadOptions, QuadratureResult, JET_BITS};

/// A log-SNR integrand `k(a)` for `a >= 1`, parameterised by `c = P / sigma^2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    /// `log2(1 + c a^2)`, increasing.
    Capacity { snr: Rational },
    /// `log2(1 + c a^2) - log2(a^2) = log2(c + a^-2)`, decreasing.
    Excess { snr: Rational },
    /// `log2(1 + 1/(c a^2))`, decreasing.
    Gap { snr: Rational },
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kernel::Capacity { snr } => write!(f, "log2(1 + ({snr}) a^2)"),
            Kernel::Excess { snr } => write!(f, "log2({snr} + a^-2)"),
            Kernel::Gap { snr } => write!(f, "log2(1 + 1 / (({snr}) a^2))"),
        }
    }
}

/// `P / sigma^2` after validating both.
pub fn snr(power: &Rational, sigma_sq: &Rational) -> Result<Rational> {
    if !power.is_positive() || !sigma_sq.is_positive() {
        return Err(Error::Validation(format!(
            "power and noise variance must be positive, got P={power}, sigma^2={sigma_sq}"
        )));
    }
    power.checked_div(sigma_sq)
}

impl Kernel {
    pub fn snr(&self) -> &Rational {
        match self {
            Kernel::Capacity { snr } | Kernel::Excess { snr } | Kernel::Gap { snr } => snr,
        }
    }

    pub fn increasing(&self) -> bool {
        matches!(self, Kernel::Capacity { .. })
    }

    pub fn jet(&self, x: &Jet, inv_ln2: &Interval) -> Result<Jet> {
        let one = Rational::one();
        match self {
            Kernel::Capacity { snr } => x.sqr().scale(snr).add_const(&one).log2(inv_ln2),
            Kernel::Excess { snr } => x.sqr().recip()?.add_const(snr).log2(inv_ln2),
            Kernel::Gap { snr } => x.sqr().scale(snr).recip()?.add_const(&one).log2(inv_ln2),
        }
    }

    pub fn eval_f64(&self, a: f64) -> f64 {
        let c = self.snr().to_f64();
        match self {
            Kernel::Capacity { .. } => (c * a * a).ln_1p() / std::f64::consts::LN_2,
            Kernel::Excess { .. } => (c + 1.0 / (a * a)).log2(),
            Kernel::Gap { .. } => (1.0 / (c * a * a)).ln_1p() / std::f64::consts::LN_2,
        }
    }

    /// Sup of `k` over `a >= from >= 1`, for the decreasing kernels.
    pub fn sup_from(&self, from: &Rational, bits: u32) -> Result<Rational> {
        if self.increasing() {
            return Err(Error::Domain(format!("{self} is unbounded")));
        }
        let x = Jet::rational(from.clone());
        Ok(self.jet(&x, &inv_ln2_enclosure(bits))?.v.round_out(bits).hi().clone())
    }
}

/// `int_1^upper k(t + s) g(t) dt` with `upper` clipped to `[1, 4]`, for rational `s >= 0`.
pub fn bump_integral(
    kernel: &Kernel,
    s: &Rational,
    upper: Option<&Rational>,
    opts: &QuadOptions,
) -> Result<QuadratureResult> {
    if s.is_negative() {
        return Err(Error::Validation(format!("bump shift must be nonnegative, got {s}")));
    }
    type Key = (Kernel, Rational, Option<Rational>, Rational, usize);
    static CACHE: OnceLock<Mutex<HashMap<Key, QuadratureResult>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (kernel.clone(), s.clone(), upper.cloned(), opts.tol.clone(), opts.budget);
    if let Some(r) = cache.lock().expect("cache poisoned").get(&key) {
        return Ok(r.clone());
    }
    let inv = inv_ln2_enclosure(JET_BITS);
    let pieces: Vec<Piece> = g_pieces()
        .into_iter()
        .enumerate()
        .filter_map(|(i, (lo, hi, _, _))| {
            let hi = match upper {
                Some(u) if u < &hi => u.clone(),
                _ => hi,
            };
            (lo < hi).then(|| {
                let inv = inv.clone();
                Piece::new(lo, hi, move |t: &Jet| Ok(g_jet(i, t).mul(&kernel.jet(&t.add_const(s), &inv)?)))
            })
        })
        .collect();
    let r = integrate(&pieces, opts)?;
    cache.lock().expect("cache poisoned").insert(key, r.clone());
    Ok(r)
}

/// Encloses `int_1^4 k(t + s) g(t) dt` for every `s` in an interval, from the two
/// endpoint integrals; valid because every kernel is monotone on `a >= 1`.
pub fn bump_integral_shifted(kernel: &Kernel, s: &Interval, opts: &QuadOptions) -> Result<QuadratureResult> {
    let a = bump_integral(kernel, s.lo(), None, opts)?;
    if s.is_point() {
        return Ok(a);
    }
    let b = bump_integral(kernel, s.hi(), None, opts)?;
    let (lo, hi) = if kernel.increasing() { (&a, &b) } else { (&b, &a) };
    Ok(QuadratureResult {
        enclosure: Interval::new(lo.enclosure.lo().clone(), hi.enclosure.hi().clone())?,
        subdivisions: a.subdivisions + b.subdivisions,
        radius: a.radius.clone().max(b.radius.clone()),
        converged: a.converged && b.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(bits: i64) -> QuadOptions {
        QuadOptions { tol: Rational::pow2(-bits), budget: 1 << 16 }
    }

    #[test]
    fn kernels_split_the_capacity_integrand() {
        let c = Rational::frac(5, 2);
        let s = Rational::frac(3, 2);
        let cap = bump_integral(&Kernel::Capacity { snr: c.clone() }, &s, None, &opts(22)).unwrap();
        let exc = bump_integral(&Kernel::Excess { snr: c.clone() }, &s, None, &opts(22)).unwrap();
        let gap = bump_integral(&Kernel::Gap { snr: c.clone() }, &s, None, &opts(22)).unwrap();
        // Excess = Gap + log2 c against a bump of mass 1/2
        let lc = crate::exact::log2_enclosure(&c, 40).unwrap().scale(&Rational::frac(1, 2));
        assert!((&gap.enclosure + &lc).intersect(&exc.enclosure).is_some());
        // Capacity - Excess = int log2(a^2) g(a - s) = Psi(s)
        let psi = crate::constructions::psi_point(&s, 30).unwrap();
        assert!((&cap.enclosure - &exc.enclosure).intersect(&psi).is_some());
    }

    #[test]
    fn shifted_enclosure_contains_interior_points() {
        let k = Kernel::Gap { snr: Rational::one() };
        let s = Interval::new(Rational::from(2i64), Rational::frac(17, 8)).unwrap();
        let whole = bump_integral_shifted(&k, &s, &opts(22)).unwrap();
        let inner = bump_integral(&k, &Rational::frac(33, 16), None, &opts(22)).unwrap();
        assert!(whole.enclosure.contains_interval(&inner.enclosure));
    }

    #[test]
    fn clipping_at_the_support_edge() {
        let k = Kernel::Capacity { snr: Rational::one() };
        let none = bump_integral(&k, &Rational::one(), Some(&Rational::one()), &opts(20)).unwrap();
        assert_eq!(none.enclosure, Interval::zero());
        let full = bump_integral(&k, &Rational::one(), Some(&Rational::from(9i64)), &opts(20)).unwrap();
        let same = bump_integral(&k, &Rational::one(), None, &opts(20)).unwrap();
        assert_eq!(full.enclosure, same.enclosure);
    }
}
