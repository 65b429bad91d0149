//! Linear error dynamics `w_t - w_xxt + w - w_xx + (a w)_x = 0` along a
//! given coefficient trajectory `a`.
//!
//! If `u_1, u_2` solve the forced equation, `w = u_1 - u_2` solves it with
//! `a = (u_1 + u_2) / 2`, since `u_1 u_1x - u_2 u_2x = (a w)_x`.

use rustfft::num_complex::Complex64;

use crate::dynamics::{EtdStepper, SolverConfig, Trajectory};
use crate::error::{Error, Result};
use crate::spectral::SpectralField;

/// `-(I - d_xx)^{-1} (a w)_x`, Nyquist mode dropped.
fn transport(a: &SpectralField, w: &SpectralField, dealias: bool) -> Result<SpectralField> {
    let mut out = SpectralField::product(a, w, dealias)?;
    let grid = out.grid().clone();
    let nyq = grid.nyquist_index();
    for (i, (c, &xi)) in out.coeffs_mut().iter_mut().zip(grid.xi()).enumerate() {
        *c *= if i == nyq {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -xi / (1.0 + xi * xi))
        };
    }
    Ok(out)
}

/// Integrates the error equation on the time mesh of `a`, from `w0` at
/// `a.t0()`. The integrator, variant and dealiasing come from `cfg`; the step
/// is `a.dt()`. Stages between mesh points (ETDRK4) use the average of the
/// neighbouring snapshots of `a`.
pub fn error_evolve(w0: &SpectralField, a: &Trajectory, cfg: &SolverConfig) -> Result<Trajectory> {
    if !w0.grid().same_as(a.grid()) {
        return Err(Error::Dimension("w0 and a live on different grids".into()));
    }
    if a.len() < 2 {
        return Err(Error::MeshMismatch("coefficient trajectory needs at least two snapshots".into()));
    }
    let h = a.dt();
    let lambda = cfg.variant.linear_symbols(w0.grid());
    let stepper = EtdStepper::new(cfg.integrator, h, &lambda);
    let dealias = cfg.dealias;
    let coefficient = |t: f64| -> Result<SpectralField> {
        let s = (t - a.t0()) / h;
        let nearest = s.round();
        if (s - nearest).abs() < 1e-6 && nearest >= 0.0 && (nearest as usize) < a.len() {
            return Ok(a.snapshot(nearest as usize).clone());
        }
        let lo = s.floor();
        if (s - lo - 0.5).abs() < 1e-6 && lo >= 0.0 && (lo as usize + 1) < a.len() {
            let i = lo as usize;
            let mut mid = a.snapshot(i).clone();
            mid.axpy(1.0, a.snapshot(i + 1))?;
            mid.scale_in_place(0.5);
            return Ok(mid);
        }
        Err(Error::MeshMismatch(format!("t = {t} is not on the coefficient mesh")))
    };
    let mut nl = |w: &SpectralField, t: f64| -> Result<SpectralField> { transport(&coefficient(t)?, w, dealias) };
    let mut snapshots = Vec::with_capacity(a.len());
    let mut w = w0.clone();
    snapshots.push(w.clone());
    for i in 1..a.len() {
        w = stepper.step(&w, a.time(i - 1), &mut nl)?;
        if !w.is_finite() {
            return Err(Error::Divergence { step: i, time: a.time(i) });
        }
        snapshots.push(w.clone());
    }
    Trajectory::new(a.t0(), h, snapshots)
}
