//! Pseudospectral simulation of the forced, weakly damped BBM equation
//! `u_t - u_xxt + u - u_xx + u u_x = f` on a periodic truncation of the
//! line, together with numerical checks of I-method estimates, the
//! `u = v + z` Picard splitting, and the periodic orbit's stability.

// `!(x > 0.0)` is the NaN-rejecting form used for parameter checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
mod error;
pub mod io;
pub mod orbit;
pub mod par;
pub mod picard;
pub mod spectral;
pub mod stats;
pub mod verification;

pub use error::{Error, Result};
