//! Forcing, time integration and trajectory norms.

mod etd;
mod forcing;
mod solver;
mod trajectory;

pub(crate) use etd::EtdStepper;
pub use etd::{phi, Integrator};
pub use forcing::{ForcingSpec, SpatialProfile, TemporalProfile};
pub(crate) use solver::step_count;
pub use solver::{
    convection, evolve, linear_evolve, linear_trajectory, lwp_bound_check, lwp_sweep_summary, rhs,
    LwpReport, LwpSweep, Solver, SolverConfig, Variant,
};
pub use trajectory::{y_norm_from_series, Trajectory};
pub(crate) use trajectory::trapezoid;
