//! Periodic orbit of the time-periodically forced problem: Poincare
//! iteration, error dynamics, decay-rate fits and stability experiments.

mod error_dynamics;
mod fit;
mod poincare;
mod stability;

pub use error_dynamics::error_evolve;
pub use fit::{decay_fit, envelope_rate, DecayFit};
pub use poincare::{poincare_iterate, OrbitOptions, OrbitResult};
pub use stability::{
    absorbing_check, absorbing_check_trajectory, absorbing_pilot_rate, difference_series, local_stability_experiment,
    orbit_distance, trilinear_along, two_phase_experiment, AbsorbingReport, AbsorbingSample, Perturbation, PilotRate,
    StabilityOptions, StabilityRun, TrilinearAlongReport, TwoPhaseOptions, TwoPhaseReport,
};
