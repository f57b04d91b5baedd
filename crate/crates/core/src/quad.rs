//! Certified adaptive quadrature.
//!
//! Integrands are written once against [`Jet`], a second-order interval jet.
//! Evaluating the integrand on a point jet gives the midpoint value and on
//! an interval jet gives an enclosure of `f''` over the whole subinterval, so
//! each leaf is enclosed by the midpoint rule with its exact remainder
//!
//! ```text
//! int_a^b f = h f(m) + (h^3 / 24) f''(xi),   xi in [a, b]
//! ```
//!
//! intersected with the zeroth-order enclosure `h * f([a, b])`. Leaves with
//! the widest enclosure are bisected first. Integrands only need to be
//! smooth inside each [`Piece`]; kinks go on piece boundaries.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{log2_interval, Interval, Rational};

/// Rounding grid (in bits) used inside jet arithmetic.
pub const JET_BITS: u32 = 72;

/// Value, first and second derivative enclosures of a function of one variable.
#[derive(Clone, Debug)]
pub struct Jet {
    pub v: Interval,
    pub d1: Interval,
    pub d2: Interval,
}

impl Jet {
    pub fn var(x: Interval) -> Jet {
        Jet { v: x, d1: Interval::point(Rational::one()), d2: Interval::zero() }
    }

    pub fn constant(c: Interval) -> Jet {
        Jet { v: c, d1: Interval::zero(), d2: Interval::zero() }
    }

    pub fn rational(c: Rational) -> Jet {
        Jet::constant(Interval::point(c))
    }

    fn round(self) -> Jet {
        Jet { v: self.v.round_out(JET_BITS), d1: self.d1.round_out(JET_BITS), d2: self.d2.round_out(JET_BITS) }
    }

    pub fn add(&self, o: &Jet) -> Jet {
        Jet { v: &self.v + &o.v, d1: &self.d1 + &o.d1, d2: &self.d2 + &o.d2 }
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        Jet { v: &self.v - &o.v, d1: &self.d1 - &o.d1, d2: &self.d2 - &o.d2 }
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let two = Rational::from(2i64);
        Jet {
            v: &self.v * &o.v,
            d1: &(&self.d1 * &o.v) + &(&self.v * &o.d1),
            d2: &(&(&self.d2 * &o.v) + &(&self.d1 * &o.d1).scale(&two)) + &(&self.v * &o.d2),
        }
        .round()
    }

    pub fn scale(&self, c: &Rational) -> Jet {
        Jet { v: self.v.scale(c), d1: self.d1.scale(c), d2: self.d2.scale(c) }
    }

    /// Multiplies every component by a constant interval.
    pub fn scale_interval(&self, c: &Interval) -> Jet {
        Jet { v: &self.v * c, d1: &self.d1 * c, d2: &self.d2 * c }.round()
    }

    pub fn add_const(&self, c: &Rational) -> Jet {
        Jet { v: &self.v + &Interval::point(c.clone()), d1: self.d1.clone(), d2: self.d2.clone() }
    }

    pub fn sqr(&self) -> Jet {
        let two = Rational::from(2i64);
        Jet {
            v: self.v.sqr(),
            d1: (&self.v * &self.d1).scale(&two),
            d2: (&self.d1.sqr() + &(&self.v * &self.d2)).scale(&two),
        }
        .round()
    }

    pub fn div(&self, o: &Jet) -> Result<Jet> {
        // w = u/v, w' = (u' - w v')/v, w'' = (u'' - 2 w' v' - w v'')/v
        let inv = o.v.recip()?.round_out(JET_BITS);
        let w = (&self.v * &inv).round_out(JET_BITS);
        let w1 = (&(&self.d1 - &(&w * &o.d1)) * &inv).round_out(JET_BITS);
        let two = Rational::from(2i64);
        let w2 = &(&(&self.d2 - &(&w1 * &o.d1).scale(&two)) - &(&w * &o.d2)) * &inv;
        Ok(Jet { v: w, d1: w1, d2: w2 }.round())
    }

    pub fn recip(&self) -> Result<Jet> {
        Jet::rational(Rational::one()).div(self)
    }

    /// `log2` of a positive jet. `inv_ln2` must enclose `1/ln 2`.
    pub fn log2(&self, inv_ln2: &Interval) -> Result<Jet> {
        let v = log2_interval(&self.v, JET_BITS - 8)?;
        let inv = self.v.recip()?.round_out(JET_BITS);
        let r = (&self.d1 * &inv).round_out(JET_BITS);
        // (ln u)' = u'/u, (ln u)'' = u''/u - (u'/u)^2
        let d2 = &(&self.d2 * &inv) - &r.sqr();
        Ok(Jet { v, d1: &r * inv_ln2, d2: &d2 * inv_ln2 }.round())
    }
}

/// An integrand evaluated on jets.
pub type JetFn<'a> = Box<dyn Fn(&Jet) -> Result<Jet> + Send + Sync + 'a>;

/// A smooth integrand on `[lo, hi]`.
pub struct Piece<'a> {
    pub lo: Rational,
    pub hi: Rational,
    pub f: JetFn<'a>,
}

impl<'a> Piece<'a> {
    pub fn new(lo: Rational, hi: Rational, f: impl Fn(&Jet) -> Result<Jet> + Send + Sync + 'a) -> Self {
        Piece { lo, hi, f: Box::new(f) }
    }
}

#[derive(Clone, Debug)]
pub struct QuadOptions {
    /// Stop once the total enclosure is at most this wide.
    pub tol: Rational,
    /// Maximum number of leaves.
    pub budget: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { tol: Rational::pow2(-30), budget: 20_000 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadratureResult {
    pub enclosure: Interval,
    pub subdivisions: usize,
    pub radius: Rational,
    /// False when the budget ran out before the tolerance was met.
    pub converged: bool,
}

struct Leaf {
    /// Set once bisection stopped paying off; frozen leaves sort last.
    frozen: bool,
    width: Rational,
    lo: Rational,
    hi: Rational,
    piece: usize,
    enc: Interval,
}

impl PartialEq for Leaf {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Leaf {}
impl PartialOrd for Leaf {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Leaf {
    fn cmp(&self, o: &Self) -> Ordering {
        // widest live leaf first; ties broken by position so the order is total and deterministic
        o.frozen
            .cmp(&self.frozen)
            .then_with(|| self.width.cmp(&o.width))
            .then_with(|| o.piece.cmp(&self.piece))
            .then_with(|| o.lo.cmp(&self.lo))
    }
}

fn leaf_enclosure(f: &dyn Fn(&Jet) -> Result<Jet>, lo: &Rational, hi: &Rational) -> Result<Interval> {
    let h = hi - lo;
    if h.is_zero() {
        return Ok(Interval::zero());
    }
    let whole = f(&Jet::var(Interval::new(lo.clone(), hi.clone())?))?;
    let zeroth = whole.v.scale(&h);
    let mid = (lo + hi).shl(-1);
    let at_mid = f(&Jet::var(Interval::point(mid)))?;
    let h3_24 = (&h * &h * &h).checked_div(&Rational::from(24i64))?;
    let second = &at_mid.v.scale(&h) + &whole.d2.scale(&h3_24);
    let enc = zeroth
        .intersect(&second)
        .ok_or_else(|| Error::Domain(format!("inconsistent enclosures on [{lo}, {hi}]: {zeroth} vs {second}")))?;
    Ok(enc.round_out(JET_BITS))
}

/// Integrates the sum of `pieces` to the requested width or until the budget is spent.
pub fn integrate(pieces: &[Piece<'_>], opts: &QuadOptions) -> Result<QuadratureResult> {
    let mut heap = BinaryHeap::new();
    // Endpoint sums are tracked separately so that retiring a leaf is exact.
    let mut sum_lo = Rational::zero();
    let mut sum_hi = Rational::zero();
    let mut radius = Rational::zero();
    for (i, p) in pieces.iter().enumerate() {
        if p.lo > p.hi {
            return Err(Error::Validation(format!("piece bounds out of order: [{}, {}]", p.lo, p.hi)));
        }
        radius = radius.max(p.hi.abs()).max(p.lo.abs());
        let enc = leaf_enclosure(&*p.f, &p.lo, &p.hi)?;
        sum_lo = sum_lo + enc.lo();
        sum_hi = sum_hi + enc.hi();
        heap.push(Leaf { frozen: false, width: enc.width(), lo: p.lo.clone(), hi: p.hi.clone(), piece: i, enc });
    }
    let mut best = Interval::new(sum_lo.clone(), sum_hi.clone())?;
    let mut leaves = heap.len();
    while best.width() > opts.tol && leaves < opts.budget {
        let Some(leaf) = heap.pop() else { break };
        if leaf.frozen || leaf.width.is_zero() {
            heap.push(leaf);
            break;
        }
        let mid = (&leaf.lo + &leaf.hi).shl(-1);
        let f = &*pieces[leaf.piece].f;
        let left = leaf_enclosure(f, &leaf.lo, &mid)?;
        let right = leaf_enclosure(f, &mid, &leaf.hi)?;
        // Width floors from interval coefficients stop refinement from helping.
        let stalled = (left.width() + right.width()).shl(5) > leaf.width.clone() * Rational::from(31i64);
        sum_lo = sum_lo - leaf.enc.lo() + left.lo() + right.lo();
        sum_hi = sum_hi - leaf.enc.hi() + left.hi() + right.hi();
        let total = Interval::new(sum_lo.clone(), sum_hi.clone())?;
        // Running intersection keeps the reported enclosure nested as work grows.
        best = best.intersect(&total).unwrap_or(total);
        heap.push(Leaf {
            frozen: stalled,
            width: left.width(),
            lo: leaf.lo.clone(),
            hi: mid.clone(),
            piece: leaf.piece,
            enc: left,
        });
        heap.push(Leaf { frozen: stalled, width: right.width(), lo: mid, hi: leaf.hi, piece: leaf.piece, enc: right });
        leaves += 1;
    }
    Ok(QuadratureResult { converged: best.width() <= opts.tol, enclosure: best, subdivisions: leaves, radius })
}
