//! CSV and JSON traces of certificates and enumerator prefixes.

use serde::Serialize;

use crate::error::Result;
use crate::exact::Rational;

use super::certs::Sigma1Cert;
use super::enumerator::{Backend, REEnumerator};

#[derive(Debug, Clone, Serialize)]
pub struct CertTrace {
    pub label: String,
    pub bound: u64,
    pub rows: Vec<(u64, Rational)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnumeratorTrace {
    pub label: String,
    pub backend: Backend,
    pub content_hash: String,
    pub prefix: Vec<u64>,
}

pub fn cert_trace(c: &Sigma1Cert, k_max: u64) -> CertTrace {
    CertTrace { label: c.label().to_string(), bound: c.bound(), rows: (0..=k_max).map(|k| (k, c.term(k))).collect() }
}

pub fn enumerator_trace(e: &REEnumerator, n: u64) -> Result<EnumeratorTrace> {
    Ok(EnumeratorTrace {
        label: e.label().to_string(),
        backend: e.backend(),
        content_hash: e.content_hash(),
        prefix: e.prefix(n)?,
    })
}

impl CertTrace {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,term\n");
        for (k, t) in &self.rows {
            s.push_str(&format!("{k},{t}\n"));
        }
        s
    }
}

impl EnumeratorTrace {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("i,value\n");
        for (i, v) in self.prefix.iter().enumerate() {
            s.push_str(&format!("{i},{v}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_json_shapes() {
        let c = Sigma1Cert::new("g", 1, |k| Rational::one() - Rational::pow2(-(k as i64)));
        let t = cert_trace(&c, 2);
        assert_eq!(t.to_csv(), "k,term\n0,0/1\n1,1/2\n2,3/4\n");
        let j = serde_json::to_value(&t).unwrap();
        assert_eq!(j["rows"][2][1], "3/4");
        let e = enumerator_trace(&REEnumerator::identity(), 3).unwrap();
        assert_eq!(e.to_csv(), "i,value\n0,1\n1,2\n2,3\n");
        assert_eq!(serde_json::to_value(&e).unwrap()["backend"], "injected_test");
    }
}
