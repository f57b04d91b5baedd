//! Frozen regression values: how each is computed, and how it is stored.
//!
//! Every golden file is JSON with exact rationals as `"num/den"` strings. The
//! `compute_*` functions regenerate the content; `examples/freeze_golden.rs`
//! writes them and the verify suite compares against what is committed.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::capacity::{capacity_certificate, theorem1_check, Fading};
use crate::constructions::{build_bump_train, BumpTrainOptions};
use crate::error::{Error, Result};
use crate::exact::{Interval, Rational};
use crate::fixtures;
use crate::hierarchy::{delta2_anytime, REEnumerator, SpeckerNumber};
use crate::oracle::train_capacity_closed_form;

pub const SPECKER_FILE: &str = "specker_dovetail.json";
pub const THEOREM1_FILE: &str = "theorem1_oracle1.json";
pub const ORACLE_FILE: &str = "capacity_oracle1.json";
pub const GEN_PDF_FILE: &str = "gen_pdf_geo1.json";

/// Golden files shipped with the crate.
pub fn default_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join("golden")
}

pub fn load<T: DeserializeOwned>(dir: &Path, name: &str) -> Result<T> {
    let path = dir.join(name);
    let text = fs::read_to_string(&path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("golden values serialize") + "\n"
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeckerGolden {
    pub table_hash: String,
    pub k: u64,
    pub phi: Vec<u64>,
    pub partial: Vec<Rational>,
}

pub const SPECKER_K: u64 = 10;

pub fn compute_specker() -> Result<SpeckerGolden> {
    let e = REEnumerator::dovetail_tm();
    let s = SpeckerNumber::new(e.clone());
    Ok(SpeckerGolden {
        table_hash: e.content_hash(),
        k: SPECKER_K,
        phi: e.prefix(SPECKER_K)?,
        partial: (1..=SPECKER_K).map(|k| s.partial(k)).collect::<Result<_>>()?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Golden {
    pub x1: String,
    pub x2: String,
    pub power: Rational,
    pub sigma1_sq: Rational,
    pub sigma2_sq: Rational,
    pub k: u64,
    pub residual: Rational,
    pub combined_error: Rational,
}

pub const THEOREM1_K: u64 = 32;

pub fn compute_theorem1() -> Result<Theorem1Golden> {
    let one = Rational::one();
    let r = theorem1_check(&fixtures::geo_shifted(), &fixtures::geo_quarter(), &one, &one, &one, THEOREM1_K)?;
    Ok(Theorem1Golden {
        x1: r.x1,
        x2: r.x2,
        power: r.power,
        sigma1_sq: r.sigma1_sq,
        sigma2_sq: r.sigma2_sq,
        k: r.k,
        residual: r.residual,
        combined_error: r.combined_error,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleGolden {
    pub channel: String,
    /// `C_S` from the closed-form bump integrals plus the certified tails.
    pub oracle: Interval,
    pub tolerance: Rational,
    /// First radius from which the anytime estimate stays within `tolerance` of the oracle midpoint.
    pub k0: u64,
    pub k_max: u64,
    pub estimates: Vec<Rational>,
}

pub const ORACLE_K_MAX: u64 = 32;

fn train_of(f: &Fading) -> Result<&crate::constructions::BumpTrainPdf> {
    match f {
        Fading::Train(t) => Ok(t),
        _ => Err(Error::Validation("oracle channel must be built from bump trains".into())),
    }
}

/// The closed-form oracle for the "oracle-1" channel.
pub fn oracle1_value() -> Result<Interval> {
    let ch = fixtures::channel("oracle-1")?;
    let a = train_capacity_closed_form(train_of(&ch.f1)?, ch.bob_kernel().snr())?;
    let b = train_capacity_closed_form(train_of(&ch.f2)?, ch.eve_kernel().snr())?;
    Ok(&a - &b)
}

/// Anytime estimates for radii `1..=k_max` on "oracle-1".
pub fn oracle1_estimates(k_max: u64) -> Result<Vec<Rational>> {
    let cert = capacity_certificate(&fixtures::channel("oracle-1")?);
    Ok((1..=k_max).map(|k| delta2_anytime(&cert.as_delta2, k)).collect())
}

/// Smallest `k0` with `|estimate(k) - target| <= tol` for all `k0 <= k <= k_max`.
pub fn settling_index(estimates: &[Rational], target: &Rational, tol: &Rational) -> Option<u64> {
    let last_bad = estimates.iter().rposition(|e| &(e - target).abs() > tol);
    match last_bad {
        None => Some(1),
        Some(i) if i + 1 < estimates.len() => Some(i as u64 + 2),
        Some(_) => None,
    }
}

pub fn compute_oracle() -> Result<OracleGolden> {
    let oracle = oracle1_value()?;
    let estimates = oracle1_estimates(ORACLE_K_MAX)?;
    let tolerance = Rational::frac(1, 1000);
    let k0 = settling_index(&estimates, &oracle.mid(), &tolerance)
        .ok_or_else(|| Error::Domain("anytime estimate never settles within 1e-3".into()))?;
    Ok(OracleGolden { channel: "oracle-1".into(), oracle, tolerance, k0, k_max: ORACLE_K_MAX, estimates })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenPdfGolden {
    pub fixture: String,
    pub truncation: u64,
    /// Mass of the retained bumps, widened by the tail bound; contains 1.
    pub mass: Interval,
    pub tail_bound: Rational,
}

pub const GEN_PDF_TERMS: u64 = 16;

pub fn compute_gen_pdf() -> Result<GenPdfGolden> {
    let p = build_bump_train(&fixtures::geo_shifted(), GEN_PDF_TERMS, &BumpTrainOptions::default())?;
    let m = p.truncated_mass();
    let tail = p.tail_mass(GEN_PDF_TERMS);
    Ok(GenPdfGolden {
        fixture: "geo-1".into(),
        truncation: GEN_PDF_TERMS,
        mass: Interval::new(m.lo().clone(), m.hi() + &tail)?,
        tail_bound: tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settling() {
        let q = |n| Rational::frac(n, 100);
        let e = [q(50), q(10), q(2), q(1), q(0)];
        assert_eq!(settling_index(&e, &Rational::zero(), &q(2)), Some(3));
        assert_eq!(settling_index(&e, &Rational::zero(), &q(60)), Some(1));
        assert_eq!(settling_index(&[q(5)], &Rational::zero(), &q(1)), None);
    }
}
