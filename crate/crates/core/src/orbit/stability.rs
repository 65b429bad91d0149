//! Local stability of the periodic orbit, the absorbing-ball inequality, and
//! the trilinear bound along error dynamics.

use super::fit::{decay_fit, envelope_rate, DecayFit};
use crate::dynamics::{ForcingSpec, Solver, Trajectory};
use crate::error::{invalid, Result};
use crate::spectral::{i_h1_norm, ImethodParams, SpectralField};
use crate::verification::{trilinear_form, TrilinearConstant};

/// Initial datum `phi + epsilon * shape`.
#[derive(Clone, Debug, PartialEq)]
pub struct Perturbation {
    pub epsilon: f64,
    pub shape: SpectralField,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityOptions {
    pub horizon: f64,
    pub fit_start: f64,
    pub fit_end: f64,
    /// Sobolev index of the difference norm.
    pub ell: f64,
}

impl StabilityOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.fit_start >= 0.0 && self.fit_end > self.fit_start && self.horizon >= self.fit_end) {
            return Err(invalid(
                "stability.fit_window",
                format!(
                    "need 0 <= fit_start < fit_end <= horizon, got [{}, {}] with horizon {}",
                    self.fit_start, self.fit_end, self.horizon
                ),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityRun {
    pub epsilon: f64,
    pub times: Vec<f64>,
    /// `||u(t) - u~(t)||^2_{H^ell}`.
    pub sq_norms: Vec<f64>,
    /// `None` for the unperturbed (exact-orbit) case.
    pub fit: Option<DecayFit>,
    /// `||u - u~||_{H^ell}` at the horizon.
    pub final_difference: f64,
}

/// Squared `H^ell` distance between two trajectories on one mesh.
pub fn difference_series(u: &Trajectory, reference: &Trajectory, ell: f64) -> Result<Vec<f64>> {
    Ok(u.difference(reference)?.norms(|f| f.sobolev_norm_sq(ell)))
}

/// Simulates `phi_tilde + epsilon * shape` for each perturbation alongside the
/// orbit through `phi_tilde` and fits the decay of their squared distance.
pub fn local_stability_experiment(
    phi_tilde: &SpectralField,
    perturbations: &[Perturbation],
    forcing: &ForcingSpec,
    solver: &Solver,
    opts: &StabilityOptions,
) -> Result<Vec<StabilityRun>> {
    opts.validate()?;
    let orbit = solver.evolve(phi_tilde, forcing, 0.0, opts.horizon)?;
    let times = orbit.times();
    crate::par::try_map(perturbations, |p| {
        if p.epsilon == 0.0 {
            return Ok(StabilityRun {
                epsilon: 0.0,
                times: times.clone(),
                sq_norms: vec![0.0; times.len()],
                fit: None,
                final_difference: 0.0,
            });
        }
        let mut start = phi_tilde.clone();
        start.axpy(p.epsilon, &p.shape)?;
        let run = solver.evolve(&start, forcing, 0.0, opts.horizon)?;
        let sq_norms = difference_series(&run, &orbit, opts.ell)?;
        let fit = decay_fit(&times, &sq_norms, opts.fit_start, opts.fit_end)?;
        Ok(StabilityRun {
            epsilon: p.epsilon,
            final_difference: sq_norms.last().copied().unwrap_or(0.0).sqrt(),
            times: times.clone(),
            sq_norms,
            fit: Some(fit),
        })
    })
}

/// `||u_a(t) - u_b(t)||_{H^ell}` for two solutions of the forced problem.
pub fn orbit_distance(
    phi_a: &SpectralField,
    phi_b: &SpectralField,
    forcing: &ForcingSpec,
    solver: &Solver,
    t: f64,
    ell: f64,
) -> Result<f64> {
    let a = solver.evolve_final(phi_a, forcing, 0.0, t)?;
    let b = solver.evolve_final(phi_b, forcing, 0.0, t)?;
    Ok((&a - &b).sobolev_norm(ell))
}

/// Rate `gamma_1` from an unforced pilot run: the tightest anchored envelope
/// `||I_N u(t)||^2_{H^1} <= e^{-2 gamma t} ||I_N phi||^2_{H^1}`, alongside an
/// ordinary least-squares fit of the same series over the whole run.
#[derive(Clone, Debug, PartialEq)]
pub struct PilotRate {
    pub envelope: f64,
    pub fit: DecayFit,
    pub times: Vec<f64>,
    pub energies: Vec<f64>,
}

pub fn absorbing_pilot_rate(
    phi: &SpectralField,
    params: &ImethodParams,
    solver: &Solver,
    horizon: f64,
) -> Result<PilotRate> {
    let traj = solver.evolve(phi, &ForcingSpec::zero(), 0.0, horizon)?;
    let times = traj.times();
    let energies = traj.norms(|f| i_h1_norm(f, params).powi(2));
    let envelope = envelope_rate(&times, &energies)?;
    let fit = decay_fit(&times, &energies, 0.0, horizon)?;
    Ok(PilotRate {
        envelope,
        fit,
        times,
        energies,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbsorbingSample {
    pub t: f64,
    /// `||I_N u(t)||^2_{H^1}`.
    pub lhs: f64,
    /// `e^{-2 gamma_1 t} ||I_N phi||^2_{H^1} + sup ||f||^2 / (2 gamma_1)`.
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AbsorbingReport {
    pub gamma1: f64,
    pub sup_forcing: f64,
    /// `sup ||f|| / sqrt(2 gamma_1) + margin`, in the `||I_N .||_{H^1}` norm.
    pub radius: f64,
    pub samples: Vec<AbsorbingSample>,
    pub violations: Vec<AbsorbingSample>,
    /// First sampled time with `||I_N u||_{H^1} <= radius`.
    pub entry_time: Option<f64>,
}

impl AbsorbingReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the absorbing inequality at every snapshot of `traj`, which must
/// start from `phi` at `t = 0` under `forcing`.
pub fn absorbing_check_trajectory(
    traj: &Trajectory,
    forcing: &ForcingSpec,
    params: &ImethodParams,
    gamma1: f64,
    margin: f64,
) -> Result<AbsorbingReport> {
    if !(gamma1 > 0.0) {
        return Err(invalid("gamma1", format!("must be positive, got {gamma1}")));
    }
    if !(margin >= 0.0) {
        return Err(invalid("margin", format!("must be nonnegative, got {margin}")));
    }
    let sup_forcing = forcing.sup_l2(traj.grid());
    let radius = sup_forcing / (2.0 * gamma1).sqrt() + margin;
    let e0 = i_h1_norm(traj.first(), params).powi(2);
    let floor = sup_forcing * sup_forcing / (2.0 * gamma1);
    let mut samples = Vec::with_capacity(traj.len());
    let mut violations = Vec::new();
    let mut entry_time = None;
    for (i, u) in traj.snapshots().iter().enumerate() {
        let t = traj.time(i) - traj.t0();
        let norm = i_h1_norm(u, params);
        let s = AbsorbingSample {
            t: traj.time(i),
            lhs: norm * norm,
            rhs: (-2.0 * gamma1 * t).exp() * e0 + floor,
        };
        if s.lhs > s.rhs {
            violations.push(s);
        }
        if entry_time.is_none() && norm <= radius {
            entry_time = Some(s.t);
        }
        samples.push(s);
    }
    Ok(AbsorbingReport {
        gamma1,
        sup_forcing,
        radius,
        samples,
        violations,
        entry_time,
    })
}

/// Simulates from `phi` over `[0, horizon]` and runs [`absorbing_check_trajectory`].
pub fn absorbing_check(
    phi: &SpectralField,
    forcing: &ForcingSpec,
    params: &ImethodParams,
    solver: &Solver,
    horizon: f64,
    gamma1: f64,
    margin: f64,
) -> Result<AbsorbingReport> {
    let traj = solver.evolve(phi, forcing, 0.0, horizon)?;
    absorbing_check_trajectory(&traj, forcing, params, gamma1, margin)
}

/// The two-phase experiment: absorption from large data, then decay of the
/// distance to the periodic orbit after entry.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoPhaseReport {
    pub pilot: PilotRate,
    pub absorbing: AbsorbingReport,
    /// Fit of `||u - u~||^2_{H^ell}` on `[entry, entry + post_entry_window]`.
    pub post_entry: Option<DecayFit>,
    pub times: Vec<f64>,
    pub orbit_sq_distance: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoPhaseOptions {
    pub horizon: f64,
    pub pilot_horizon: f64,
    pub margin: f64,
    pub post_entry_window: f64,
    pub ell: f64,
}

pub fn two_phase_experiment(
    phi_large: &SpectralField,
    phi_tilde: &SpectralField,
    forcing: &ForcingSpec,
    params: &ImethodParams,
    solver: &Solver,
    opts: &TwoPhaseOptions,
) -> Result<TwoPhaseReport> {
    let pilot = absorbing_pilot_rate(phi_large, params, solver, opts.pilot_horizon)?;
    let traj = solver.evolve(phi_large, forcing, 0.0, opts.horizon)?;
    let absorbing = absorbing_check_trajectory(&traj, forcing, params, pilot.envelope, opts.margin)?;
    let orbit = solver.evolve(phi_tilde, forcing, 0.0, opts.horizon)?;
    let times = traj.times();
    let orbit_sq_distance = difference_series(&traj, &orbit, opts.ell)?;
    let post_entry = match absorbing.entry_time {
        Some(entry) if entry + opts.post_entry_window <= opts.horizon => Some(decay_fit(
            &times,
            &orbit_sq_distance,
            entry,
            entry + opts.post_entry_window,
        )?),
        _ => None,
    };
    Ok(TwoPhaseReport {
        pilot,
        absorbing,
        post_entry,
        times,
        orbit_sq_distance,
    })
}

/// `|(I_N (a w)_x, I_N w)| / (||I_N a||_{H^1} ||I_N w||^2_{H^1})` along a run,
/// compared with a calibrated bound.
#[derive(Clone, Debug, PartialEq)]
pub struct TrilinearAlongReport {
    pub bound: f64,
    /// `(t, ratio)`.
    pub ratios: Vec<(f64, f64)>,
    pub violations: usize,
}

pub fn trilinear_along(
    a: &Trajectory,
    w: &Trajectory,
    params: &ImethodParams,
    constant: &TrilinearConstant,
) -> Result<TrilinearAlongReport> {
    a.check_mesh(w)?;
    let bound = constant.bound(params.n());
    let ratios = a
        .snapshots()
        .iter()
        .zip(w.snapshots())
        .enumerate()
        .map(|(i, (ai, wi))| {
            let form = trilinear_form(ai, wi, wi, params)?;
            let denom = i_h1_norm(ai, params) * i_h1_norm(wi, params).powi(2);
            let r = if form == 0.0 { 0.0 } else { form.abs() / denom };
            Ok((a.time(i), r))
        })
        .collect::<Result<Vec<_>>>()?;
    let violations = ratios.iter().filter(|r| r.1 > bound).count();
    Ok(TrilinearAlongReport {
        bound,
        ratios,
        violations,
    })
}
