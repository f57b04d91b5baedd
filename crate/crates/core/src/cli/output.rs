//! Output envelopes. JSON documents carry a `meta` object; CSV files open with
//! `# key: value` comment lines holding the same fields.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{Interval, Rational};

use super::config::SCHEMA_VERSION;

/// Fractional digits of every decimal rendering.
pub const DECIMAL_DIGITS: usize = 15;

#[derive(Clone, Debug, Serialize)]
pub struct EnumeratorId {
    pub label: String,
    pub hash: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub schema_version: u32,
    pub config_digest: String,
    pub enumerator: EnumeratorId,
    pub decimal_digits: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp_unix: Option<u64>,
}

impl Meta {
    pub fn new(command: &str, config_digest: String, enumerator: EnumeratorId, timestamp: bool) -> Meta {
        Meta {
            tool: "delta2",
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            schema_version: SCHEMA_VERSION,
            config_digest,
            enumerator,
            decimal_digits: DECIMAL_DIGITS,
            timestamp_unix: timestamp
                .then(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)),
        }
    }

    fn csv_header(&self) -> String {
        let mut s = String::new();
        for (k, v) in [
            ("tool", self.tool.to_string()),
            ("version", self.version.to_string()),
            ("command", self.command.clone()),
            ("schema_version", self.schema_version.to_string()),
            ("config_digest", self.config_digest.clone()),
            ("enumerator", self.enumerator.label.clone()),
            ("enumerator_hash", self.enumerator.hash.clone()),
            ("decimal_digits", self.decimal_digits.to_string()),
        ] {
            s.push_str(&format!("# {k}: {v}\n"));
        }
        if let Some(t) = self.timestamp_unix {
            s.push_str(&format!("# timestamp_unix: {t}\n"));
        }
        s
    }
}

/// A rational with its decimal rendering.
#[derive(Clone, Debug, Serialize)]
pub struct Num {
    pub exact: Rational,
    pub decimal: String,
}

impl From<&Rational> for Num {
    fn from(q: &Rational) -> Num {
        Num { exact: q.clone(), decimal: q.to_decimal(DECIMAL_DIGITS) }
    }
}

/// An interval with decimal renderings of its ends, rounded outward.
#[derive(Clone, Debug, Serialize)]
pub struct Range {
    pub lo: Rational,
    pub hi: Rational,
    pub lo_decimal: String,
    pub hi_decimal: String,
}

impl From<&Interval> for Range {
    fn from(i: &Interval) -> Range {
        let scale = Rational::from_int(num_bigint::BigInt::from(10u32).pow(DECIMAL_DIGITS as u32));
        let down = Rational::from_int((i.lo() * &scale).floor()).checked_div(&scale).expect("nonzero");
        let up = Rational::from_int((i.hi() * &scale).ceil()).checked_div(&scale).expect("nonzero");
        Range {
            lo: i.lo().clone(),
            hi: i.hi().clone(),
            lo_decimal: down.to_decimal(DECIMAL_DIGITS),
            hi_decimal: up.to_decimal(DECIMAL_DIGITS),
        }
    }
}

/// A JSON document `{ "meta": ..., <body fields> }`.
pub fn json_doc<T: Serialize>(meta: &Meta, body: &T) -> String {
    let mut v = serde_json::to_value(body).expect("body serializes");
    let obj = v.as_object_mut().expect("bodies are structs");
    let mut out = serde_json::Map::new();
    out.insert("meta".into(), serde_json::to_value(meta).expect("meta serializes"));
    out.append(obj);
    serde_json::to_string_pretty(&serde_json::Value::Object(out)).expect("serializes") + "\n"
}

/// A CSV document: meta comments, extra comment lines, a header row, then rows.
pub fn csv_doc(meta: &Meta, notes: &[String], header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = meta.csv_header();
    for n in notes {
        s.push_str(&format!("# {n}\n"));
    }
    s.push_str(&header.join(","));
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

/// Writes to `out`, or stdout when absent.
pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Validation(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())
                .and_then(|_| so.flush())
                .map_err(|e| Error::Validation(format!("stdout: {e}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_round_outward() {
        let r = Range::from(&Interval::new(Rational::frac(-1, 3), Rational::frac(2, 3)).unwrap());
        assert_eq!(r.lo_decimal, "-0.333333333333334");
        assert_eq!(r.hi_decimal, "0.666666666666667");
        assert_eq!(Num::from(&Rational::frac(1, 8)).decimal, "0.125000000000000");
    }

    #[test]
    fn timestamp_is_optional() {
        let id = EnumeratorId { label: "x".into(), hash: "h".into() };
        let m = Meta::new("specker", "d".into(), id.clone(), false);
        assert!(!json_doc(&m, &serde_json::json!({})).contains("timestamp"));
        let m = Meta::new("specker", "d".into(), id, true);
        assert!(csv_doc(&m, &[], &["a"], &[]).contains("# timestamp_unix"));
    }
}
