//! Periodic grids, Fourier coefficient fields, multipliers and Sobolev norms.

mod field;
mod grid;
mod imethod;

pub use field::{weight, SpectralField, REAL_RESIDUE_TOL};
pub use grid::Grid;
pub use imethod::{i_h1_norm, i_multiplier, i_operator, ImethodParams};
pub use rustfft::num_complex::Complex64;
