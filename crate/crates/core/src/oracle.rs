//! Closed-form single-bump capacity, evaluated in high-precision floating point.
//!
//! Independent of the certified quadrature: `int log2(1 + c a^2) g(|a| - s) da`
//! reduces, piece by piece of the trapezoid, to the antiderivatives
//! `A0 = x L - 2x + (2/sqrt c) atan(sqrt c x)` and `A1 = ((1 + c x^2) L - c x^2) / (2c)`
//! of `L = ln(1 + c x^2)` and `x L`.

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::{BigInt, Sign as BigSign};

use crate::constructions::BumpTrainPdf;
use crate::error::{Error, Result};
use crate::exact::{log2_enclosure, Interval, Rational};

/// Working precision of the oracle.
pub const ORACLE_BITS: usize = 320;
/// Claimed absolute error of the returned value; a few dozen roundings at
/// [`ORACLE_BITS`] on magnitudes below `2^20` stay far inside it.
pub const ORACLE_ERROR_BITS: i64 = 200;

const RM: RoundingMode = RoundingMode::ToEven;

struct Ctx {
    cc: Consts,
}

impl Ctx {
    fn new() -> Result<Ctx> {
        Consts::new().map(|cc| Ctx { cc }).map_err(|e| Error::Domain(format!("astro-float constants: {e:?}")))
    }

    fn int(&mut self, n: &BigInt) -> BigFloat {
        BigFloat::parse(&n.to_string(), Radix::Dec, ORACLE_BITS, RM, &mut self.cc)
    }

    fn rat(&mut self, q: &Rational) -> BigFloat {
        let n = self.int(q.numer());
        let d = self.int(q.denom());
        n.div(&d, ORACLE_BITS, RM)
    }

    fn ln(&mut self, x: &BigFloat) -> BigFloat {
        x.ln(ORACLE_BITS, RM, &mut self.cc)
    }

    fn atan(&mut self, x: &BigFloat) -> BigFloat {
        x.atan(ORACLE_BITS, RM, &mut self.cc)
    }
}

fn add(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.add(b, ORACLE_BITS, RM)
}

fn sub(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.sub(b, ORACLE_BITS, RM)
}

fn mul(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.mul(b, ORACLE_BITS, RM)
}

fn div(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.div(b, ORACLE_BITS, RM)
}

/// Exact value of a finite float.
fn to_rational(x: &BigFloat) -> Result<Rational> {
    if x.is_zero() {
        return Ok(Rational::zero());
    }
    let (words, _, sign, exp, _) =
        x.as_raw_parts().ok_or_else(|| Error::Domain("oracle produced a non-finite value".into()))?;
    let digits: Vec<u32> = words.iter().flat_map(|w| [*w as u32, (*w >> 32) as u32]).collect();
    let s = if sign == Sign::Neg { BigSign::Minus } else { BigSign::Plus };
    let m = Rational::from_int(BigInt::from_slice(s, &digits));
    Ok(m.shl(exp as i64 - 64 * words.len() as i64))
}

struct Antiderivatives<'a> {
    c: &'a BigFloat,
    sqrt_c: BigFloat,
    two: BigFloat,
}

impl Antiderivatives<'_> {
    /// `(A0(x), A1(x))`.
    fn at(&self, ctx: &mut Ctx, x: &BigFloat) -> (BigFloat, BigFloat) {
        let cx2 = mul(self.c, &mul(x, x));
        let one_cx2 = add(&BigFloat::from_u8(1, ORACLE_BITS), &cx2);
        let l = ctx.ln(&one_cx2);
        let at = ctx.atan(&mul(&self.sqrt_c, x));
        let a0 = add(&sub(&mul(x, &l), &mul(&self.two, x)), &div(&mul(&self.two, &at), &self.sqrt_c));
        let a1 = div(&sub(&mul(&one_cx2, &l), &cx2), &mul(&self.two, self.c));
        (a0, a1)
    }
}

/// `int log2(1 + c a^2) g(|a| - shift) da` over the real line, with `g` the
/// trapezoid on `[1, 4]` of total mass `1/2` per side.
pub fn bump_capacity_closed_form(shift: &Rational, c: &Rational) -> Result<Interval> {
    if shift.is_negative() || !c.is_positive() {
        return Err(Error::Validation(format!("need shift >= 0 and c > 0, got {shift}, {c}")));
    }
    let mut ctx = Ctx::new()?;
    let cf = ctx.rat(c);
    let sqrt_c = cf.sqrt(ORACLE_BITS, RM);
    let anti = Antiderivatives { c: &cf, sqrt_c, two: BigFloat::from_u8(2, ORACLE_BITS) };
    let knots: Vec<BigFloat> = (1..=4i64).map(|k| ctx.rat(&(shift + &Rational::from(k)))).collect();
    let vals: Vec<(BigFloat, BigFloat)> = knots.iter().map(|x| anti.at(&mut ctx, x)).collect();
    // weight alpha x + beta on each piece, times 4
    let s = ctx.rat(shift);
    let one = BigFloat::from_u8(1, ORACLE_BITS);
    let pieces = [
        (one.clone(), add(&s, &one).neg()),
        (BigFloat::from_u8(0, ORACLE_BITS), one.clone()),
        (one.neg(), add(&s, &BigFloat::from_u8(4, ORACLE_BITS))),
    ];
    let mut total = BigFloat::from_u8(0, ORACLE_BITS);
    for (i, (alpha, beta)) in pieces.iter().enumerate() {
        let d0 = sub(&vals[i + 1].0, &vals[i].0);
        let d1 = sub(&vals[i + 1].1, &vals[i].1);
        total = add(&total, &add(&mul(alpha, &d1), &mul(beta, &d0)));
    }
    // 2 sides, weight / 4, natural log to base 2
    let ln2 = ctx.ln(&anti.two);
    let value = div(&total, &mul(&anti.two, &ln2));
    let v = to_rational(&value)?;
    let eps = Rational::pow2(-ORACLE_ERROR_BITS);
    Interval::new(&v - &eps, &v + &eps)
}

/// `int log2(1 + c a^2) f(a) da` for a bump train, over all its bumps.
///
/// Retained bumps use the closed form at both ends of `alpha*_n`, valid because the
/// integrand increases in the shift. Past the truncation, `log2(1 + c a^2) <= log2(1 + c) + log2(a^2)`
/// on `|a| >= 1`, and the log-moment of bump `n` is `d_n` per unit of `z*`, so the
/// dropped part is at most `log2(1 + c) tail_mass + tail_d`.
pub fn train_capacity_closed_form(train: &BumpTrainPdf, c: &Rational) -> Result<Interval> {
    let mut acc = Interval::zero();
    for n in 1..=train.terms() {
        let a = train.alpha_star(n);
        let lo = bump_capacity_closed_form(a.lo(), c)?;
        let hi = bump_capacity_closed_form(a.hi(), c)?;
        let i = Interval::new(lo.lo().clone(), hi.hi().clone())?;
        acc = &acc + &(train.weight(n) * &i);
    }
    let retained = acc.checked_div(train.zstar_enclosure())?;
    let k = train.terms();
    let lc = log2_enclosure(&(c + &Rational::one()), 64)?;
    let tail = lc.hi() * &train.tail_mass(k) + train.tail_d(k);
    Interval::new(retained.lo().clone(), retained.hi() + &tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raw_parts_round_trip() {
        let mut ctx = Ctx::new().unwrap();
        for q in [Rational::frac(3, 8), Rational::frac(-5, 1), Rational::frac(1023, 4)] {
            assert_eq!(to_rational(&ctx.rat(&q)).unwrap(), q);
        }
    }

    #[test]
    fn small_snr_limit() {
        // log2(1 + c a^2) ~ c a^2 / ln 2 as c -> 0; E[a^2] = 20/3 for shift 0
        let c = Rational::pow2(-40);
        let v = bump_capacity_closed_form(&Rational::zero(), &c).unwrap();
        let lead = (&c * &Rational::frac(20, 3)).to_f64() / std::f64::consts::LN_2;
        assert!((v.mid().to_f64() / lead - 1.0).abs() < 1e-9);
    }
}
