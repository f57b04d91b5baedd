//! Explicit densities: the bump `g`, bump trains `f_1`, `f_2`, and the star density `f*`.

pub(crate) mod bump;
mod star;
mod train;

use serde::Serialize;

pub use bump::{
    eval_g, g_interval, g_jet, g_pieces, integral_g, moment_enclosure, moment_m, phi, phi_interval, psi, psi_interval,
    psi_point,
};
pub use star::{
    build_star_pdf, c1, compute_km, eval_gm, gm_integral, gm_integral_bound, km_enclosure, StarBasis, StarDescriptor,
    StarIntegral, StarOptions, StarPdf, StarTerm, FIRST_INDEX,
};
pub use train::{build_bump_train, bump_weights, pdf_eval, BumpTrainDescriptor, BumpTrainOptions, BumpTrainPdf};

/// Serialized form of a constructed density; field names are fixed by
/// `docs/pdf-descriptor.md`.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PdfDescriptor {
    /// `g(|a| - shift)`, a single bump on each side with total mass 1.
    Bump {
        shift: crate::exact::Rational,
    },
    BumpTrain(BumpTrainDescriptor),
    Star(StarDescriptor),
}
