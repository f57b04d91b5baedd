//! Certified evaluation of the secrecy-capacity functional of fast-fading Gaussian wiretap channels.

mod channel;
mod decomposition;
mod fading;
mod kernel;
mod lemma2;
mod monte_carlo;

pub use channel::{
    capacity_certificate, capacity_certificate_with, capacity_opts, capacity_truncations, quad_capacity_term,
    CapacityCertificate, Channel, ChannelSummary, CAPACITY_TOL_BITS,
};
pub use decomposition::{theorem1_check, theorem1_check_with, Theorem1Report};
pub use fading::{Coverage, Fading, FadingIntegral};
pub use kernel::{bump_integral, bump_integral_shifted, snr, Kernel};
pub use lemma2::{lemma2_table, lemma2_x, Lemma2Table};
pub use monte_carlo::{abs_cdf, mc_estimate, sample_inverse_cdf, McEstimate, MAX_SAMPLING_TAIL};
