//! Σ₁, Π₁ and Δ₂ certificates, r.e. enumerators and Specker numbers.
//!
//! Generic tooling only ever sees an [`REEnumerator`] through its output
//! stream; no membership oracle is exposed.

mod certs;
mod enumerator;
mod export;
pub mod machines;
mod specker;

pub use certs::{delta2_anytime, sigma1_partial, sigma1_shift, CertViolation, Delta2Cert, Pi1Cert, Sigma1Cert};
pub use enumerator::{re_enumerate, Backend, Cursor, REEnumerator, DEFAULT_STAGE_CAP};
pub use export::{cert_trace, enumerator_trace, CertTrace, EnumeratorTrace};
pub use specker::{specker_partial, SpeckerNumber};
