//! Certified computable analysis for the secrecy capacity of fast-fading
//! Gaussian wiretap channels.

pub mod capacity;
pub mod cli;
pub mod constructions;
pub mod creal;
pub mod error;
pub mod exact;
pub mod fixtures;
pub mod golden;
pub mod hierarchy;
pub mod oracle;
pub mod quad;
pub mod rng;
pub mod verify;

pub use error::{Error, Result};
pub use exact::{Interval, Rational};
