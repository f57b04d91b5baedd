//! Named Σ₁ certificates with declared geometric tails and the channels built on them,
//! shared by tests, examples and the CLI.

use std::sync::Arc;

use crate::capacity::{Channel, Fading};
use crate::constructions::{build_bump_train, build_star_pdf, BumpTrainOptions, StarOptions};
use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::hierarchy::{REEnumerator, Sigma1Cert};

/// `a_k = 4 - 2^-k`: `d_1 = 7/2`, `d_n = 2^-n` for `n >= 2`, limit 4, tail `2^-k`.
pub fn geo_shifted() -> Sigma1Cert {
    Sigma1Cert::new("geo-1", 5, |k| Rational::from(4i64) - Rational::pow2(-(k as i64)))
        .with_tail(|k| Rational::pow2(-(k as i64)))
}

/// `a_k = 3 + (1 - 4^-k)/2`: limit 7/2, tail `4^-k / 2`.
pub fn geo_quarter() -> Sigma1Cert {
    Sigma1Cert::new("geo-2", 4, |k| Rational::from(3i64) + (Rational::one() - Rational::pow2(-2 * k as i64)).shl(-1))
        .with_tail(|k| Rational::pow2(-2 * k as i64 - 1))
}

/// Looks a fixture up by name.
pub fn by_name(name: &str) -> Option<Sigma1Cert> {
    match name {
        "geo-1" => Some(geo_shifted()),
        "geo-2" => Some(geo_quarter()),
        _ => None,
    }
}

pub const NAMES: [&str; 2] = ["geo-1", "geo-2"];

/// Bumps kept per density in the fixture channels.
pub const CHANNEL_TERMS: u64 = 16;

fn train(c: &Sigma1Cert, terms: u64) -> Result<Fading> {
    Ok(Fading::Train(Arc::new(build_bump_train(c, terms, &BumpTrainOptions::default())?)))
}

/// Named channels: two asymmetric pairs, a symmetric one, and the injected-oracle
/// pair whose log-moment difference is exactly `4 - 7/2 = 1/2`.
pub fn channel(name: &str) -> Result<Channel> {
    let q = Rational::frac;
    match name {
        "pair-1" => Channel::new(
            train(&geo_shifted(), CHANNEL_TERMS)?,
            train(&geo_quarter(), CHANNEL_TERMS)?,
            q(1, 1),
            q(2, 1),
            q(4, 1),
        ),
        "pair-2" => {
            Channel::new(train(&geo_quarter(), CHANNEL_TERMS)?, Fading::bump(q(2, 1))?, q(1, 2), q(1, 1), q(1, 1))
        }
        "symmetric" => {
            let f = train(&geo_shifted(), CHANNEL_TERMS)?;
            Channel::new(f.clone(), f, q(1, 1), q(1, 1), q(3, 1))
        }
        "oracle-1" => Channel::new(
            train(&geo_shifted(), ORACLE_TERMS)?,
            train(&geo_quarter(), ORACLE_TERMS)?,
            q(1, 1),
            q(1, 1),
            q(1, 1),
        ),
        _ => Err(Error::Validation(format!("unknown channel fixture {name:?}; known: {}", CHANNEL_NAMES.join(", ")))),
    }
}

pub const CHANNEL_NAMES: [&str; 4] = ["pair-1", "pair-2", "symmetric", "oracle-1"];

/// Bumps kept in "oracle-1"; the dropped mass is below `2^-32`.
pub const ORACLE_TERMS: u64 = 32;

/// Shifts of the single-bump fixtures, with `(P, sigma^2)`.
pub fn single_bumps() -> Vec<(Rational, Rational, Rational)> {
    let q = Rational::frac;
    vec![
        (q(0, 1), q(1, 1), q(1, 1)),
        (q(1, 2), q(1, 1), q(1, 1)),
        (q(3, 1), q(1, 1), q(1, 1)),
        (q(7, 4), q(5, 1), q(2, 1)),
        (q(10, 1), q(1, 3), q(1, 1)),
    ]
}

/// `identity`, `dovetail`, or `table:<v1>,<v2>,...` (an injected finite stream).
pub fn enumerator(spec: &str) -> Result<REEnumerator> {
    match spec.split_once(':') {
        None if spec == "identity" => Ok(REEnumerator::identity()),
        None if spec == "dovetail" => Ok(REEnumerator::dovetail_tm()),
        Some(("table", list)) => {
            let values = list
                .split(',')
                .map(|v| v.trim().parse::<u64>().map_err(|_| Error::Validation(format!("bad table entry {v:?}"))))
                .collect::<Result<Vec<_>>>()?;
            REEnumerator::from_table(spec, values)
        }
        _ => Err(Error::Validation(format!(
            "unknown enumerator {spec:?}; expected identity, dovetail or table:<v1>,<v2>,..."
        ))),
    }
}

/// Densities by spec: `bump:<shift>`, `train:<fixture>:<terms>` or `star:<enumerator>:<truncation>`.
/// `bits` overrides the working precision of the construction.
pub fn pdf(spec: &str, bits: Option<u32>) -> Result<Fading> {
    let bad = || {
        Error::Validation(format!(
            "bad pdf spec {spec:?}; expected bump:<shift>, train:<fixture>:<terms> or star:<enumerator>:<truncation>"
        ))
    };
    let (kind, rest) = spec.split_once(':').ok_or_else(bad)?;
    // the enumerator part may itself contain ':'
    let split_last = |r: &str| -> Result<(String, u64)> {
        let (head, n) = r.rsplit_once(':').ok_or_else(bad)?;
        Ok((head.to_string(), n.parse().map_err(|_| bad())?))
    };
    match kind {
        "bump" => Fading::bump(rest.parse()?),
        "train" => {
            let (name, terms) = split_last(rest)?;
            let cert = by_name(&name)
                .ok_or_else(|| Error::Validation(format!("unknown fixture {name:?}; known: {}", NAMES.join(", "))))?;
            let mut opts = BumpTrainOptions::default();
            if let Some(b) = bits {
                opts.bits = b;
            }
            Ok(Fading::Train(Arc::new(build_bump_train(&cert, terms, &opts)?)))
        }
        "star" => {
            let (e, t) = split_last(rest)?;
            let mut opts = StarOptions::default();
            if let Some(b) = bits {
                opts.bits = b;
            }
            Ok(Fading::Star(Arc::new(build_star_pdf(&enumerator(&e)?, t, &opts)?)))
        }
        _ => Err(bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specs_parse() {
        assert!(matches!(pdf("bump:3/2", None), Ok(Fading::Bump { .. })));
        assert_eq!(pdf("train:geo-2:4", None).unwrap().label(), "train[geo-2;4]");
        assert!(pdf("train:nope:4", None).is_err());
        assert!(pdf("bump:-1", None).is_err());
        assert!(pdf("cone:1", None).is_err());
        assert_eq!(enumerator("table:3,1,4").unwrap().prefix(3).unwrap(), vec![3, 1, 4]);
        assert!(enumerator("table:3,3").is_err());
        assert!(enumerator("random").is_err());
    }
}
