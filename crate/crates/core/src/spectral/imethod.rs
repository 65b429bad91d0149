//! The I-method Fourier multiplier `m_N` and operator `I_N`.
//!
//! `m_N(xi) = 1` for `|xi| <= N` and `(|xi| / N)^(ell - 1)` for `|xi| >= 2N`.
//! On `N < |xi| < 2N` the exponent is blended with a smoothstep in
//! log-frequency,
//!
//! ```text
//! r = log2(|xi| / N),   m_N(xi) = exp(s(r) (ell - 1) ln(|xi| / N)),   s(r) = 3r^2 - 2r^3,
//! ```
//!
//! which is C^1 at both junctions and nonincreasing in `|xi|`.

use crate::error::{invalid, Result};
use crate::spectral::field::{weight, SpectralField};

/// Sobolev index `ell` and multiplier threshold `N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImethodParams {
    ell: f64,
    n: f64,
}

impl ImethodParams {
    pub fn new(ell: f64, n: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&ell) {
            return Err(invalid("ell", format!("must lie in [0, 1], got {ell}")));
        }
        if !(n.is_finite() && n > 0.0) {
            return Err(invalid("N", format!("must be positive, got {n}")));
        }
        Ok(Self { ell, n })
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn with_n(&self, n: f64) -> Result<Self> {
        Self::new(self.ell, n)
    }
}

fn smoothstep(r: f64) -> f64 {
    r * r * (3.0 - 2.0 * r)
}

/// `m_N(xi)`, a value in `(0, 1]`.
pub fn i_multiplier(xi: f64, params: &ImethodParams) -> f64 {
    let a = xi.abs();
    let n = params.n;
    if a <= n || params.ell == 1.0 {
        return 1.0;
    }
    let log_ratio = (a / n).ln();
    let exponent = params.ell - 1.0;
    if a >= 2.0 * n {
        return (exponent * log_ratio).exp();
    }
    let r = log_ratio / std::f64::consts::LN_2;
    (smoothstep(r) * exponent * log_ratio).exp()
}

/// `I_N g`: coefficientwise multiplication by `m_N`.
pub fn i_operator(field: &SpectralField, params: &ImethodParams) -> SpectralField {
    field.apply_real_multiplier(|xi| i_multiplier(xi, params))
}

/// `||I_N g||_{H^1}` from the weighted coefficient sum, without forming `I_N g`.
pub fn i_h1_norm(field: &SpectralField, params: &ImethodParams) -> f64 {
    let sum: f64 = field
        .coeffs()
        .iter()
        .zip(field.grid().xi())
        .map(|(c, &xi)| {
            let m = i_multiplier(xi, params);
            m * m * weight(xi, 1.0) * c.norm_sqr()
        })
        .sum();
    (field.grid().length() * sum).sqrt()
}
