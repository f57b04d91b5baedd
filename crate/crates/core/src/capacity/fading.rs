//! Fading densities as seen by the capacity functionals.

use std::sync::Arc;

use serde::Serialize;

use crate::constructions::{BumpTrainPdf, PdfDescriptor, StarPdf};
use crate::error::{Error, Result};
use crate::exact::{Interval, Rational};
use crate::quad::{QuadOptions, JET_BITS};

use super::kernel::{bump_integral, bump_integral_shifted, Kernel};

/// An even fading density, vanishing on `[-1, 1]`.
#[derive(Clone, Debug)]
pub enum Fading {
    /// `g(|a| - shift)`, total mass 1.
    Bump { shift: Rational },
    /// A truncated bump train; the first `terms()` bumps are kept.
    Train(Arc<BumpTrainPdf>),
    /// A truncated star density.
    Star(Arc<StarPdf>),
}

/// `int_{-r}^{r} k f` over the retained part of `f`.
#[derive(Clone, Debug, Serialize)]
pub struct FadingIntegral {
    pub enclosure: Interval,
    pub converged: bool,
    pub subdivisions: usize,
    /// Bumps (or unit intervals of the star support) fully inside the radius.
    pub covered: u64,
}

/// How a truncation radius meets the support.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Coverage {
    pub radius: Rational,
    pub covered: u64,
    /// Smallest radius covering every retained piece that starts inside `radius`.
    pub adjusted: Rational,
}

impl Coverage {
    pub fn under_covered(&self) -> bool {
        self.adjusted > self.radius
    }
}

impl Fading {
    pub fn bump(shift: Rational) -> Result<Fading> {
        if shift.is_negative() {
            return Err(Error::Validation(format!("bump shift must be nonnegative, got {shift}")));
        }
        Ok(Fading::Bump { shift })
    }

    pub fn label(&self) -> String {
        match self {
            Fading::Bump { shift } => format!("bump[{shift}]"),
            Fading::Train(p) => format!("train[{};{}]", p.source().label(), p.terms()),
            Fading::Star(p) => format!("star[{};{}]", p.enumerator().label(), p.truncation()),
        }
    }

    pub fn descriptor(&self) -> PdfDescriptor {
        match self {
            Fading::Bump { shift } => PdfDescriptor::Bump { shift: shift.clone() },
            Fading::Train(p) => p.descriptor(),
            Fading::Star(p) => p.descriptor(),
        }
    }

    /// Content hash of the enumerator behind a star density; empty otherwise.
    pub fn content_hash(&self) -> String {
        match self {
            Fading::Star(p) => p.enumerator().content_hash(),
            _ => String::new(),
        }
    }

    /// Bound on the mass dropped by the truncation.
    pub fn tail_mass(&self) -> Rational {
        match self {
            Fading::Bump { .. } => Rational::zero(),
            Fading::Train(p) => p.tail_mass(p.terms()),
            Fading::Star(p) => p.mass_tail(),
        }
    }

    /// Upper bound on `int log2(a^2) f(a) da` for the untruncated density.
    pub fn log_moment_bound(&self) -> Rational {
        match self {
            // log2((4 + s)^2) < 2 (floor_log2(4 + s) + 1)
            Fading::Bump { shift } => {
                let l = (shift + &Rational::from(4i64)).floor_log2().expect("positive");
                Rational::from(2 * (l + 1))
            }
            Fading::Train(p) => Rational::from(p.source().bound()),
            // 4 int_1^inf log2(a) f* = (2 / c2) x_A with x_A < 1
            Fading::Star(p) => Rational::from(2i64).checked_div(p.c2().lo()).expect("c2 > 0"),
        }
    }

    /// `(start, end)` of each retained piece on `a > 0`; every endpoint is an upper bound.
    fn pieces(&self) -> Vec<Rational> {
        match self {
            Fading::Bump { shift } => vec![shift + &Rational::from(4i64)],
            Fading::Train(p) => (1..=p.terms()).map(|n| p.alpha_star(n).hi() + &Rational::from(4i64)).collect(),
            Fading::Star(p) => (2..=p.truncation()).map(|k| Rational::from(k + 1)).collect(),
        }
    }

    pub fn coverage(&self, radius: &Rational) -> Coverage {
        let ends = self.pieces();
        let covered = ends.iter().filter(|e| *e <= radius).count() as u64;
        // a piece starts at most 3 before its certified end (unit pieces start 1 before)
        let reach = match self {
            Fading::Star(_) => Rational::one(),
            _ => Rational::from(3i64),
        };
        let adjusted = ends
            .iter()
            .filter(|e| &(*e - &reach) < radius)
            .fold(radius.clone(), |m, e| m.max(Rational::from_int(e.ceil())));
        Coverage { radius: radius.clone(), covered, adjusted }
    }

    /// Encloses `int_{-r}^{r} k(|a|) f(a) da` over every retained piece that fits
    /// inside the radius (`None` keeps them all). Pieces straddling the radius are
    /// dropped, so for nonnegative `k` the lower endpoint is nondecreasing in `r`.
    pub fn integrate(&self, kernel: &Kernel, radius: Option<&Rational>, opts: &QuadOptions) -> Result<FadingIntegral> {
        let two = Rational::from(2i64);
        match self {
            Fading::Bump { shift } => {
                let upper = radius.map(|r| r - shift);
                let r = bump_integral(kernel, shift, upper.as_ref(), opts)?;
                let covered = u64::from(radius.is_none_or(|r| r >= &(shift + &Rational::from(4i64))));
                Ok(FadingIntegral {
                    enclosure: r.enclosure.scale(&two),
                    converged: r.converged,
                    subdivisions: r.subdivisions,
                    covered,
                })
            }
            Fading::Train(p) => {
                let mut acc = Interval::zero();
                let mut converged = true;
                let mut subdivisions = 0;
                let mut covered = 0;
                let four = Rational::from(4i64);
                for n in 1..=p.terms() {
                    let a = p.alpha_star(n);
                    if radius.is_some_and(|r| &(a.hi() + &four) > r) {
                        continue;
                    }
                    let r = bump_integral_shifted(kernel, a, opts)?;
                    converged &= r.converged;
                    subdivisions += r.subdivisions;
                    covered += 1;
                    acc = &acc + &(p.weight(n) * &r.enclosure);
                }
                let enclosure = acc.scale(&two).checked_div(p.zstar_enclosure())?.round_out(JET_BITS);
                Ok(FadingIntegral { enclosure, converged, subdivisions, covered })
            }
            Fading::Star(p) => {
                let inv = crate::exact::inv_ln2_enclosure(JET_BITS);
                let h = move |x: &crate::quad::Jet| kernel.jet(x, &inv);
                let units = p.unit_integrals(&h, opts)?;
                let mut acc = Interval::zero();
                let mut converged = true;
                let mut subdivisions = 0;
                let mut covered = 0;
                for (i, u) in units.iter().enumerate() {
                    if radius.is_some_and(|r| Rational::from(i as u64 + 3) > *r) {
                        continue;
                    }
                    acc = &acc + &u.enclosure;
                    converged &= u.converged;
                    subdivisions += u.subdivisions;
                    covered += 1;
                }
                Ok(FadingIntegral { enclosure: acc.scale(&two).round_out(JET_BITS), converged, subdivisions, covered })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{build_bump_train, BumpTrainOptions};
    use crate::fixtures;

    fn opts() -> QuadOptions {
        QuadOptions { tol: Rational::pow2(-24), budget: 1 << 16 }
    }

    #[test]
    fn nothing_inside_the_unit_interval() {
        let f = Fading::bump(Rational::frac(1, 2)).unwrap();
        let k = Kernel::Capacity { snr: Rational::one() };
        assert_eq!(f.integrate(&k, Some(&Rational::one()), &opts()).unwrap().enclosure, Interval::zero());
        assert!(Fading::bump(Rational::from(-1i64)).is_err());
    }

    #[test]
    fn train_coverage_and_monotone_lower_ends() {
        let p = build_bump_train(&fixtures::geo_quarter(), 8, &BumpTrainOptions::default()).unwrap();
        let f = Fading::Train(Arc::new(p));
        let k = Kernel::Capacity { snr: Rational::from(3i64) };
        let mut prev = Rational::zero();
        for r in 1..=14i64 {
            let v = f.integrate(&k, Some(&Rational::from(r)), &opts()).unwrap();
            assert!(v.enclosure.lo() >= &prev, "r={r}");
            prev = v.enclosure.lo().clone();
        }
        let c = f.coverage(&Rational::from(7i64));
        assert!(c.under_covered());
        assert!(f.coverage(&c.adjusted).covered > c.covered);
    }
}
