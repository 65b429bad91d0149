//! Empirical checks of the I-method inequalities: norm equivalence, the
//! bilinear smoothing estimate and the trilinear commutator estimate.

mod bilinear;
mod equivalence;
mod report;
mod sampling;
mod trilinear;

pub use bilinear::{bilinear_integrand, bilinear_ratio, verify_bilinear, BilinearSample};
pub use equivalence::{equivalence_modewise, equivalence_ratios, verify_equivalence, EquivalenceThresholds};
pub use report::{Check, EstimateReport, EstimateRow, Inequality};
pub use sampling::{
    multiscale_profiles, sample_field, sample_fields, sample_mixture, sample_trajectories, split_seed, SpectrumProfile,
};
pub use trilinear::{
    adversarial_band, adversarial_triples, calibrate_trilinear_constant, trilinear_form, trilinear_form_quadrature,
    trilinear_modewise_worst, trilinear_ratio, verify_trilinear, Triple, TrilinearConstant,
};
