//! Fixed point of the period map `phi -> u(theta)`.

use crate::dynamics::{ForcingSpec, Solver};
use crate::error::{invalid, Error, Result};
use crate::spectral::SpectralField;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitOptions {
    /// Period of the map. Must equal the forcing period when it has one.
    pub theta: f64,
    /// Sobolev index of the difference norm.
    pub ell: f64,
    pub k_max: usize,
    /// Stop once `||u_{k} - u_{k-1}||_{H^ell} <= abs_tol + rel_tol ||u_k||_{H^ell}`.
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl OrbitOptions {
    pub fn new(theta: f64, ell: f64) -> Self {
        Self {
            theta,
            ell,
            k_max: 40,
            abs_tol: 1e-9,
            rel_tol: 1e-9,
        }
    }

    pub fn validate(&self, forcing: &ForcingSpec) -> Result<()> {
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(invalid("orbit.theta", format!("must be positive, got {}", self.theta)));
        }
        if let Some(p) = forcing.period() {
            if (p - self.theta).abs() > 1e-12 * p {
                return Err(invalid(
                    "orbit.theta",
                    format!("{} differs from the forcing period {p}", self.theta),
                ));
            }
        }
        if self.k_max == 0 {
            return Err(invalid("orbit.k_max", "must be at least 1"));
        }
        if !(self.abs_tol >= 0.0 && self.rel_tol >= 0.0) || self.abs_tol + self.rel_tol == 0.0 {
            return Err(invalid("orbit.tol", "tolerances must be nonnegative and not both zero"));
        }
        Ok(())
    }

    pub fn tolerance(&self, norm: f64) -> f64 {
        self.abs_tol + self.rel_tol * norm
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitResult {
    /// Initial datum of the periodic solution.
    pub phi: SpectralField,
    /// `||u(theta) - u(0)||_{H^ell}` for the last iterate pair.
    pub residual: f64,
    /// Number of period maps applied.
    pub iterations: usize,
    /// `||u_k - u_{k-1}||_{H^ell}`, `k = 1..iterations`.
    pub differences: Vec<f64>,
}

impl OrbitResult {
    /// Consecutive ratios `d_{k+1} / d_k` of the difference series.
    pub fn contraction_ratios(&self) -> Vec<f64> {
        self.differences
            .windows(2)
            .filter(|w| w[0] > 0.0)
            .map(|w| w[1] / w[0])
            .collect()
    }
}

/// Iterates `u_k = S(theta) u_{k-1}` from `u_0 = phi0` until consecutive
/// iterates agree to the tolerance.
pub fn poincare_iterate(
    phi0: &SpectralField,
    forcing: &ForcingSpec,
    opts: &OrbitOptions,
    solver: &Solver,
) -> Result<OrbitResult> {
    opts.validate(forcing)?;
    let mut current = phi0.clone();
    let mut differences = Vec::new();
    for k in 1..=opts.k_max {
        let next = solver.evolve_final(&current, forcing, 0.0, opts.theta)?;
        let diff = (&next - &current).sobolev_norm(opts.ell);
        differences.push(diff);
        let n = differences.len();
        if n >= 3 && differences[n - 1] > differences[n - 2] && differences[n - 2] > differences[n - 3] {
            log::warn!("Poincare differences grew for two consecutive periods; data may be outside the small regime");
        }
        if diff <= opts.tolerance(next.sobolev_norm(opts.ell)) {
            return Ok(OrbitResult {
                phi: next,
                residual: diff,
                iterations: k,
                differences,
            });
        }
        current = next;
    }
    Err(Error::NoConvergence {
        iterations: opts.k_max,
        reason: format!(
            "Poincare difference {:.3e} above tolerance",
            differences.last().copied().unwrap_or(f64::NAN)
        ),
        history: differences,
    })
}
