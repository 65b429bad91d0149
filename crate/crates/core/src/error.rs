use thiserror::Error;

/// Errors produced by the simulation and verification routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("broken Hermitian symmetry: imaginary residue {residue:e} exceeds {tolerance:e}")]
    Symmetry { residue: f64, tolerance: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("solver diverged at step {step} (t = {time}): non-finite coefficient")]
    Divergence { step: usize, time: f64 },

    #[error("temporal profile `{0}` has no closed-form linear solution")]
    UnsupportedProfile(&'static str),

    #[error("window [{start}, {end}] outside trajectory span [{span_start}, {span_end}]")]
    WindowOutOfSpan {
        start: f64,
        end: f64,
        span_start: f64,
        span_end: f64,
    },

    #[error("time mesh mismatch: {0}")]
    MeshMismatch(String),

    #[error("no convergence after {iterations} iterations: {reason}")]
    NoConvergence {
        iterations: usize,
        reason: String,
        /// Update (or difference) norms recorded before giving up.
        history: Vec<f64>,
    },

    #[error("insufficient resolution: max |xi| = {max_xi} cannot resolve 4 * N = {required}")]
    Resolution { max_xi: f64, required: f64 },

    #[error("decay fit: {0}")]
    Fit(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
