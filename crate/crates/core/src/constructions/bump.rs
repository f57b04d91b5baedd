//! The trapezoidal bump `g`, its log-moments `M(n)`, `Psi` and `Phi = Psi^-1`.
//!
//! `M(n)` and `Psi` are coded along independent routes:
//!
//! * `M(n)` integrates `(A + B t) log2 t` piece by piece with the first
//!   antiderivatives `t log2 t - t/ln2` and `t^2/2 log2 t - t^2/(4 ln2)`.
//! * `Psi(u)` uses `g'' = (d1 - d2 - d3 + d4)/4` (point masses at the kinks)
//!   and the second antiderivative `L(t) = t^2/2 log2 t - 3t^2/(4 ln2)`,
//!   giving `Psi(u) = 1/4 sum_c s_c (u+c)^2 log2(u+c) - 3/(2 ln2)` with
//!   signs `s = (+, -, -, +)` at `c = 1, 2, 3, 4`.
//!
//! `Psi` is increasing with `1/((u+4) ln2) <= Psi'(u) <= 3/2` for `u >= 0`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::creal::CReal;
use crate::error::{Error, Result};
use crate::exact::{inv_ln2_enclosure, log2_enclosure, Interval, Rational};
use crate::quad::Jet;

fn q(n: i64, d: i64) -> Rational {
    Rational::frac(n, d)
}

/// `g(a)`: `(a-1)/4` on `[1,2]`, `1/4` on `[2,3]`, `(4-a)/4` on `[3,4]`, else 0.
pub fn eval_g(a: &Rational) -> Rational {
    let one = Rational::one();
    let four = Rational::from(4i64);
    if a <= &one || a >= &four {
        Rational::zero()
    } else if a <= &Rational::from(2i64) {
        (a - &one).shl(-2)
    } else if a <= &Rational::from(3i64) {
        q(1, 4)
    } else {
        (&four - a).shl(-2)
    }
}

/// Exact range of `g` over `x`. `g` is quasi-concave, so the minimum sits at an endpoint.
pub fn g_interval(x: &Interval) -> Interval {
    let a = eval_g(x.lo());
    let b = eval_g(x.hi());
    let lo = a.clone().min(b.clone());
    let touches_plateau = x.hi() >= &Rational::from(2i64) && x.lo() <= &Rational::from(3i64);
    let hi = if touches_plateau { q(1, 4) } else { a.max(b) };
    Interval::new(lo, hi).expect("ordered")
}

/// `int g = 1/8 + 1/4 + 1/8`.
pub fn integral_g() -> Rational {
    q(1, 8) + q(1, 4) + q(1, 8)
}

/// The three linear pieces of `g` as `(lo, hi, c0, c1)` with `g(a) = c0 + c1 a`.
pub fn g_pieces() -> [(Rational, Rational, Rational, Rational); 3] {
    [(q(1, 1), q(2, 1), q(-1, 4), q(1, 4)), (q(2, 1), q(3, 1), q(1, 4), q(0, 1)), (q(3, 1), q(4, 1), q(1, 1), q(-1, 4))]
}

/// `g` on a jet whose value lies inside piece `i` of [`g_pieces`].
pub fn g_jet(piece: usize, x: &Jet) -> Jet {
    let (_, _, c0, c1) = &g_pieces()[piece];
    x.scale(c1).add_const(c0)
}

/// Extra bits needed to absorb a factor of magnitude `x`.
pub(crate) fn mag_bits(x: &Rational) -> u32 {
    x.abs().floor_log2().map_or(0, |k| (k + 1).max(0) as u32)
}

/// Retries `f` with growing guard bits until its width is at most `2^-bits`.
fn refine(bits: u32, f: impl Fn(u32) -> Result<Interval>) -> Result<Interval> {
    let target = Rational::pow2(-(bits as i64));
    let mut guard = 8;
    loop {
        let out = f(bits + guard)?;
        if out.width() <= target {
            return Ok(out);
        }
        if guard > 512 {
            return Err(Error::PrecisionCap {
                requested_bits: bits,
                achievable_bits: (-out.width().floor_log2().unwrap_or(0)).max(0) as u32,
                reason: "enclosure did not tighten".into(),
            });
        }
        guard *= 2;
    }
}

/// `A(t log2 t - t/ln2) + B(t^2/2 log2 t - t^2/(4 ln2))`.
fn antiderivative(a: &Rational, b: &Rational, t: &Rational, work: u32, inv_ln2: &Interval) -> Result<Interval> {
    let l = log2_enclosure(t, work)?;
    let t2 = t * t;
    let first = &l.scale(t) - &inv_ln2.scale(t);
    let second = &l.scale(&t2.shl(-1)) - &inv_ln2.scale(&t2.shl(-2));
    Ok(&first.scale(a) + &second.scale(b))
}

/// Enclosure of `M(n) = 2 int_1^4 log2(a + n) g(a) da` of width at most `2^-bits`.
pub fn moment_enclosure(n: u64, bits: u32) -> Result<Interval> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u32), Interval>>> = OnceLock::new();
    if n == 0 {
        return Err(Error::Validation("M(n) needs n >= 1".into()));
    }
    // a coarse grid of precisions keeps the cache small
    let grid = bits.div_ceil(16) * 16;
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().expect("cache poisoned").get(&(n, grid)) {
        return Ok(v.clone());
    }
    let v = moment_uncached(n, grid)?;
    cache.lock().expect("cache poisoned").insert((n, grid), v.clone());
    Ok(v)
}

fn moment_uncached(n: u64, bits: u32) -> Result<Interval> {
    let nq = Rational::from(n);
    let big = mag_bits(&(&nq + &Rational::from(4i64)));
    refine(bits, |work| {
        let work = work + 2 * big;
        let inv = inv_ln2_enclosure(work);
        let pieces = [
            (Rational::one(), Rational::from(2i64), -(&nq + Rational::one()).shl(-2), q(1, 4)),
            (Rational::from(2i64), Rational::from(3i64), q(1, 4), Rational::zero()),
            (Rational::from(3i64), Rational::from(4i64), (&nq + Rational::from(4i64)).shl(-2), q(-1, 4)),
        ];
        let mut acc = Interval::zero();
        for (lo, hi, a, b) in pieces.iter() {
            let upper = antiderivative(a, b, &(hi + &nq), work, &inv)?;
            let lower = antiderivative(a, b, &(lo + &nq), work, &inv)?;
            acc = (&acc + &(&upper - &lower)).round_out(work + 4);
        }
        Ok(acc.scale(&Rational::from(2i64)))
    })
}

/// `M(n)` as a computable real.
pub fn moment_m(n: u64) -> Result<CReal> {
    moment_enclosure(n, 8)?;
    Ok(CReal::from_enclosure(move |p| moment_enclosure(n, p).expect("n >= 1 checked")))
}

/// Enclosure of `Psi(u)` at a rational `u > -1`, width at most `2^-bits`.
pub fn psi_point(u: &Rational, bits: u32) -> Result<Interval> {
    if u <= &-Rational::one() {
        return Err(Error::Domain(format!("Psi needs u > -1, got {u}")));
    }
    let big = mag_bits(&(u + &Rational::from(4i64)));
    refine(bits, |work| {
        let work = work + 2 * big;
        let mut acc = Interval::zero();
        for (c, sign) in [(1i64, 1i64), (2, -1), (3, -1), (4, 1)] {
            let t = u + &Rational::from(c);
            let term = log2_enclosure(&t, work)?.scale(&(&t * &t));
            acc = if sign > 0 { &acc + &term } else { &acc - &term };
        }
        let konst = inv_ln2_enclosure(work).scale(&q(3, 2));
        Ok((&acc.scale(&q(1, 4)) - &konst).round_out(work))
    })
}

/// `Psi` over an interval of arguments, using monotonicity.
pub fn psi_interval(u: &Interval, bits: u32) -> Result<Interval> {
    let lo = psi_point(u.lo(), bits)?;
    if u.is_point() {
        return Ok(lo);
    }
    let hi = psi_point(u.hi(), bits)?;
    Interval::new(lo.lo().clone(), hi.hi().clone())
}

/// `Psi(u)` as a computable real. Fails if `u` is certified negative.
pub fn psi(u: &CReal) -> Result<CReal> {
    if u.enclosure(64).hi().is_negative() {
        return Err(Error::Domain("Psi needs u >= 0; argument is certified negative".into()));
    }
    let u = u.clone();
    Ok(CReal::from_enclosure(move |p| {
        // Psi' <= 3/2 near [0, inf): argument width 2^-(p+2) costs at most 3/8 of the budget.
        let arg = u.enclosure(p + 3);
        psi_interval(&arg, p + 2).expect("argument within (-1, inf)")
    }))
}

/// Largest dyadic `lo` on a `2^-bits` grid with `Psi(lo) <= target`, certified, and the
/// smallest `hi` with `Psi(hi) >= target`, both restricted to `[0, inf)`.
fn invert_one_sided(target: &Rational, bits: u32, want_lower: bool) -> Result<Rational> {
    let psi_bits = bits + 8;
    let zero = Rational::zero();
    // exponential bracket
    let mut hi = Rational::one();
    while psi_point(&hi, psi_bits)?.lo() < target {
        hi = hi.shl(1);
        if hi > Rational::pow2(64) {
            return Err(Error::Domain("Phi argument too large".into()));
        }
    }
    let mut lo = zero;
    let step = Rational::pow2(-(bits as i64));
    while &hi - &lo > step {
        let mid = (&lo + &hi).shl(-1);
        let v = psi_point(&mid, psi_bits)?;
        let go_right = if want_lower { v.hi() <= target } else { v.lo() < target };
        if go_right {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if want_lower { lo } else { hi })
}

/// Enclosure of `Phi` over `z`, clamped to `Phi >= 0`. Errors if `z` is certified below `Psi(0)`.
pub fn phi_interval(z: &Interval, bits: u32) -> Result<Interval> {
    let p0 = psi_point(&Rational::zero(), bits + 8)?;
    if z.hi() < p0.lo() {
        return Err(Error::BelowRange(format!(
            "Phi needs z >= Psi(0) ~ {}; got z <= {}",
            p0.lo().to_decimal(6),
            z.hi().to_decimal(6)
        )));
    }
    let lo = if z.lo() <= p0.hi() { Rational::zero() } else { invert_one_sided(z.lo(), bits + 1, true)? };
    let hi = invert_one_sided(z.hi(), bits + 1, false)?;
    Interval::new(lo, hi)
}

/// `Phi(z)` as a computable real; `z` must not be certified below `Psi(0)`.
pub fn phi(z: &CReal) -> Result<CReal> {
    phi_interval(&z.enclosure(48), 8)?;
    let z = z.clone();
    Ok(CReal::from_enclosure(move |p| {
        // Phi' <= (u+4) ln 2, so the argument needs that many extra bits.
        let rough = phi_interval(&z.enclosure(8), 4).expect("range checked");
        let extra = mag_bits(&(rough.hi() + &Rational::from(4i64)));
        let arg = z.enclosure(p + 3 + extra);
        phi_interval(&arg, p + 2).expect("range checked")
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::creal::creal_from_rational;
    use proptest::prelude::*;

    #[test]
    fn g_values() {
        assert_eq!(eval_g(&q(5, 2)), q(1, 4));
        assert_eq!(eval_g(&q(1, 1)), q(0, 1));
        assert_eq!(eval_g(&q(4, 1)), q(0, 1));
        assert_eq!(eval_g(&q(7, 2)), q(1, 8));
        assert_eq!(eval_g(&q(-5, 2)), q(0, 1));
        assert_eq!(integral_g(), q(1, 2));
        let areas: Vec<Rational> = g_pieces()
            .iter()
            .map(|(lo, hi, c0, c1)| {
                // exact integral of a linear function
                c0 * &(hi - lo) + c1 * &(&(hi * hi) - &(lo * lo)).shl(-1)
            })
            .collect();
        assert_eq!(areas, vec![q(1, 8), q(1, 4), q(1, 8)]);
    }

    #[test]
    fn psi_zero_reference() {
        let p = psi_point(&Rational::zero(), 40).unwrap();
        let reference = (28.0 - 9.0 * 3f64.log2()) / 4.0 - 1.5 / std::f64::consts::LN_2;
        assert!((p.mid().to_f64() - reference).abs() < 1e-12);
        assert!(p.width() <= Rational::pow2(-40));
    }

    #[test]
    fn psi_matches_moment_on_naturals() {
        for n in 1..=8u64 {
            let a = moment_enclosure(n, 34).unwrap();
            let b = psi_point(&Rational::from(n), 34).unwrap();
            let diff = (&a - &b).max_abs();
            assert!(diff <= Rational::pow2(-30), "n={n}");
        }
    }

    #[test]
    fn moment_lower_bound_and_growth() {
        let mut prev = moment_enclosure(1, 30).unwrap();
        for n in 1..=100u64 {
            let m = moment_enclosure(n, 30).unwrap();
            let bound = log2_enclosure(&Rational::from(n + 2), 30).unwrap().scale(&q(1, 2));
            assert!(m.lo() > bound.hi(), "n={n}");
            if n > 1 {
                assert!(m.lo() > prev.hi(), "n={n}");
            }
            prev = m;
        }
    }

    #[test]
    fn phi_round_trips() {
        let zero = phi(&psi(&creal_from_rational(Rational::zero())).unwrap()).unwrap();
        assert!(zero.approx(20).abs() <= Rational::pow2(-19));
        let two = phi(&psi(&creal_from_rational(q(2, 1))).unwrap()).unwrap();
        assert!((two.approx(22) - q(2, 1)).abs() <= Rational::pow2(-20));
        let five = phi(&moment_m(5).unwrap()).unwrap();
        assert!((five.approx(22) - q(5, 1)).abs() <= Rational::pow2(-20));
    }

    #[test]
    fn phi_below_range() {
        let z = creal_from_rational(q(1, 2));
        assert!(matches!(phi(&z), Err(Error::BelowRange(_))));
        assert!(psi(&creal_from_rational(q(-1, 2))).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn psi_increasing(a in 0u32..4000, b in 0u32..4000) {
            prop_assume!(a != b);
            let (a, b) = (a.min(b), a.max(b));
            let pa = psi_point(&q(a as i64, 64), 30).unwrap();
            let pb = psi_point(&q(b as i64, 64), 30).unwrap();
            prop_assert!(pa.hi() < pb.lo());
        }

        #[test]
        fn phi_inverts_psi(num in 0u32..2000, p in 8u32..28) {
            let u = q(num as i64, 32);
            let z = psi_point(&u, p + 8).unwrap();
            let back = phi_interval(&z, p).unwrap();
            prop_assert!(back.contains(&u));
            prop_assert!(back.width() <= Rational::pow2(-(p as i64) + 1));
        }
    }
}
