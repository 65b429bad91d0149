//! The splitting `u = v + z`: `v` solves the forced linear problem exactly and
//! `z` is the fixed point of the Duhamel map
//!
//! ```text
//! G(q; v)(t) = e^{-(t - tau)} z(tau) - int_tau^t e^{-(t-s)} (I - d_xx)^{-1} (q q_x + (q v)_x + v v_x)(s) ds.
//! ```
//!
//! `I_N` commutes with `(I - d_xx)^{-1}` and `d_x`, so the iteration runs on
//! `z` itself and `I_N` enters only through the `Y^1` norms used for stopping
//! and for the contraction diagnostics.

use crate::dynamics::{convection, Trajectory};
use crate::error::{invalid, Error, Result};
use crate::spectral::{i_h1_norm, ImethodParams, SpectralField};
use crate::verification::bilinear_integrand;

/// `||I_N u||_{Y^1}` over the full span of `traj`.
pub fn imethod_y1_norm(traj: &Trajectory, params: &ImethodParams) -> f64 {
    let norms = traj.norms(|f| i_h1_norm(f, params));
    crate::dynamics::y_norm_from_series(&norms, traj.dt())
}

/// Applies the Duhamel map on the span of `v`.
///
/// `initial` is `z(tau)`; `None` means `z(tau) = 0`, the setting of the first
/// window. The time integral uses the trapezoid rule on the shared mesh with
/// the exact kernel `e^{-(t-s)}`.
pub fn apply_g(
    q: &Trajectory,
    v: &Trajectory,
    initial: Option<&SpectralField>,
    dealias: bool,
) -> Result<Trajectory> {
    q.check_mesh(v)?;
    let h = v.dt();
    let decay = (-h).exp();
    let forcing: Vec<SpectralField> = q
        .snapshots()
        .iter()
        .zip(v.snapshots())
        .map(|(a, b)| convection(&(a + b), dealias))
        .collect();
    let mut out = Vec::with_capacity(v.len());
    let mut z = match initial {
        Some(z0) => {
            if !z0.grid().same_as(v.grid()) {
                return Err(Error::Dimension("initial z on a different grid".into()));
            }
            z0.clone()
        }
        None => SpectralField::zeros(v.grid()),
    };
    out.push(z.clone());
    for n in 0..v.len() - 1 {
        z.scale_in_place(decay);
        z.axpy(0.5 * h * decay, &forcing[n])?;
        z.axpy(0.5 * h, &forcing[n + 1])?;
        out.push(z.clone());
    }
    Trajectory::new(v.t0(), h, out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PicardOptions {
    /// Stop once `||I_N (q_{j+1} - q_j)||_{Y^1} <= tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Warn when `||I_N v||_{Y^1}` exceeds this.
    pub contraction_threshold: f64,
    pub dealias: bool,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            tol: 1e-14,
            max_iter: 50,
            contraction_threshold: 0.1,
            dealias: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PicardReport {
    pub iterations: usize,
    pub update_norms: Vec<f64>,
    pub final_residual: f64,
    /// Median ratio of consecutive update norms; set with at least 3 iterations.
    pub contraction_factor: Option<f64>,
    pub v_norm: f64,
    pub z_norm: f64,
    /// `||I_N z||_{Y^1} / ||I_N v||_{Y^1}`.
    pub z_over_v: f64,
}

impl PicardReport {
    /// Whether `z` lies in `S_v = { ||I_N z||_{Y^1} <= ||I_N v||_{Y^1} }`.
    pub fn in_s_v(&self) -> bool {
        self.z_norm <= self.v_norm
    }

    /// Rows `(iter, update_norm, ratio)`; the first ratio is `NaN`.
    pub fn rows(&self) -> Vec<(usize, f64, f64)> {
        self.update_norms
            .iter()
            .enumerate()
            .map(|(j, &u)| {
                let ratio = if j == 0 { f64::NAN } else { u / self.update_norms[j - 1] };
                (j + 1, u, ratio)
            })
            .collect()
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Solves `z = G(z; v)` on the span of `v` by Picard iteration from `q_0 = 0`.
pub fn picard_solve_z(
    v: &Trajectory,
    params: &ImethodParams,
    initial: Option<&SpectralField>,
    opts: &PicardOptions,
) -> Result<(Trajectory, PicardReport)> {
    if !(opts.tol >= 0.0) || opts.max_iter == 0 {
        return Err(invalid("picard", "tol must be nonnegative and max_iter positive"));
    }
    let v_norm = imethod_y1_norm(v, params);
    if v_norm > opts.contraction_threshold {
        log::warn!(
            "||I_N v||_Y1 = {v_norm:.3e} exceeds the contraction threshold {:.3e}",
            opts.contraction_threshold
        );
    }
    let mut q = v.zeros_like();
    let mut updates: Vec<f64> = Vec::new();
    loop {
        let next = apply_g(&q, v, initial, opts.dealias)?;
        let update = imethod_y1_norm(&next.difference(&q)?, params);
        updates.push(update);
        q = next;
        if update <= opts.tol {
            break;
        }
        let n = updates.len();
        if n >= 3 && updates[n - 3] <= updates[n - 2] && updates[n - 2] <= updates[n - 1] {
            return Err(Error::NoConvergence {
                iterations: n,
                reason: "update norms non-decreasing over 3 iterations".into(),
                history: updates,
            });
        }
        if n >= opts.max_iter {
            return Err(Error::NoConvergence {
                iterations: n,
                reason: format!("update norm {update:.3e} above tol {:.3e}", opts.tol),
                history: updates,
            });
        }
    }
    let iterations = updates.len();
    let contraction_factor = (iterations >= 3).then(|| {
        let ratios: Vec<f64> = updates
            .windows(2)
            .filter(|w| w[0] > 0.0)
            .map(|w| w[1] / w[0])
            .collect();
        median(ratios)
    });
    let z_norm = imethod_y1_norm(&q, params);
    let report = PicardReport {
        iterations,
        final_residual: *updates.last().expect("at least one iteration"),
        update_norms: updates,
        contraction_factor,
        v_norm,
        z_norm,
        z_over_v: if v_norm > 0.0 { z_norm / v_norm } else { 0.0 },
    };
    Ok((q, report))
}

/// Solves for `z` window by window on `[0, k T]`, carrying `z(j T)` forward.
pub fn picard_solve_windows(
    v: &Trajectory,
    window: f64,
    count: usize,
    params: &ImethodParams,
    opts: &PicardOptions,
) -> Result<(Trajectory, Vec<PicardReport>)> {
    let mut snapshots: Vec<SpectralField> = Vec::new();
    let mut reports = Vec::with_capacity(count);
    let mut carry: Option<SpectralField> = None;
    for j in 0..count {
        let tau = v.t0() + j as f64 * window;
        let vj = v.slice(tau, window)?;
        let (zj, rep) = picard_solve_z(&vj, params, carry.as_ref(), opts)?;
        let skip = usize::from(j > 0);
        snapshots.extend(zj.snapshots()[skip..].iter().cloned());
        carry = Some(zj.last().clone());
        reports.push(rep);
    }
    Ok((Trajectory::new(v.t0(), v.dt(), snapshots)?, reports))
}

/// Per-window quantities of the windowed smallness bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowReport {
    pub index: usize,
    pub tau: f64,
    /// `||I_N z(tau)||_{H^1}`.
    pub z_start: f64,
    /// `||I_N z(tau + T)||_{H^1}`.
    pub z_end: f64,
    /// `||I_N z||_{Y^1_{tau,T}}`.
    pub z_window: f64,
    /// `||I_N v||_{Y^1_{tau,T}}`.
    pub v_window: f64,
    /// `2 ||I_N z(tau)||_{H^1} + 2 ||I_N v||_{Y^1_{tau,T}}`.
    pub shifted_bound: f64,
    pub shifted_ok: bool,
    /// `(e^{-T} + C_T ||I_N z(tau)||) ||I_N z(tau)|| + C_T ||I_N v||^2_{Y^1_{tau,T}}`.
    pub mesh_bound: f64,
    pub mesh_ok: bool,
}

/// Result of [`window_bound_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct WindowCheck {
    /// Bilinear constant measured on `(v, v)`, maximized over windows.
    pub c_t: f64,
    pub windows: Vec<WindowReport>,
}

impl WindowCheck {
    pub fn all_pass(&self) -> bool {
        self.windows.iter().all(|w| w.shifted_ok && w.mesh_ok)
    }
}

/// Checks the shifted-window bound and the mesh recursion on `[jT, (j+1)T]`.
///
/// `C_T` in the recursion is not a free fit: it is the bilinear ratio
/// `int ||(I - d_xx)^{-1} I_N (v v_x)||_{H^1} / ||I_N v||^2_{Y^1}` measured on
/// `v` alone.
pub fn window_bound_check(
    z: &Trajectory,
    v: &Trajectory,
    params: &ImethodParams,
    window: f64,
) -> Result<WindowCheck> {
    z.check_mesh(v)?;
    let span = v.t_end() - v.t0();
    let count = (span / window + 1e-9).floor() as usize;
    if count < 3 {
        return Err(invalid(
            "window",
            format!("span {span} holds {count} windows of length {window}; need at least 3"),
        ));
    }
    let mut c_t: f64 = 0.0;
    let mut partial = Vec::with_capacity(count);
    for j in 0..count {
        let tau = v.t0() + j as f64 * window;
        let vj = v.slice(tau, window)?;
        let zj = z.slice(tau, window)?;
        let v_window = imethod_y1_norm(&vj, params);
        let lhs: Vec<f64> = vj
            .snapshots()
            .iter()
            .map(|s| bilinear_integrand(s, s, params))
            .collect::<Result<_>>()?;
        let integral = crate::dynamics::trapezoid(&lhs, vj.dt());
        if v_window > 0.0 {
            c_t = c_t.max(integral / (v_window * v_window));
        }
        partial.push((j, tau, zj, v_window));
    }
    let decay = (-window).exp();
    let windows = partial
        .into_iter()
        .map(|(index, tau, zj, v_window)| {
            let z_start = i_h1_norm(zj.first(), params);
            let z_end = i_h1_norm(zj.last(), params);
            let z_window = imethod_y1_norm(&zj, params);
            let shifted_bound = 2.0 * z_start + 2.0 * v_window;
            let mesh_bound = (decay + c_t * z_start) * z_start + c_t * v_window * v_window;
            WindowReport {
                index,
                tau,
                z_start,
                z_end,
                z_window,
                v_window,
                shifted_bound,
                shifted_ok: z_window <= shifted_bound,
                mesh_bound,
                mesh_ok: z_end <= mesh_bound,
            }
        })
        .collect();
    Ok(WindowCheck { c_t, windows })
}

/// Geometric envelope `||I_N z_k|| <= zeta^{k-1} C max_j ||I_N v||^2_{Y^1, j}`,
/// with `zeta` and `C` fixed by the first two mesh points.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeReport {
    pub zeta: f64,
    pub constant: f64,
    /// `(k, ||I_N z_k||, envelope_k, holds)` for `k >= 3`.
    pub points: Vec<(usize, f64, f64, bool)>,
}

impl EnvelopeReport {
    pub fn holds(&self) -> bool {
        self.zeta < 1.0 && self.points.iter().all(|p| p.3)
    }
}

pub fn geometric_envelope(check: &WindowCheck) -> Result<EnvelopeReport> {
    let w = &check.windows;
    if w.len() < 3 {
        return Err(invalid("windows", "need at least 3 windows"));
    }
    let vmax = w.iter().map(|r| r.v_window * r.v_window).fold(0.0, f64::max);
    let z1 = w[0].z_end;
    let z2 = w[1].z_end;
    if z1 <= 0.0 || vmax <= 0.0 {
        return Err(invalid("windows", "envelope needs nonzero z_1 and v"));
    }
    let zeta = z2 / z1;
    let constant = z1 / vmax;
    let points = w
        .iter()
        .enumerate()
        .skip(2)
        .map(|(i, r)| {
            let k = i + 1;
            let env = zeta.powi(k as i32 - 1) * constant * vmax;
            (k, r.z_end, env, r.z_end <= env * (1.0 + 1e-9))
        })
        .collect();
    Ok(EnvelopeReport {
        zeta,
        constant,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{linear_trajectory, ForcingSpec, SpatialProfile, TemporalProfile, Variant};
    use crate::spectral::Grid;

    fn params() -> ImethodParams {
        ImethodParams::new(0.5, 2.0).unwrap()
    }

    #[test]
    fn zero_inputs_give_zero() {
        let g = Grid::new(32, 10.0).unwrap();
        let zero = Trajectory::constant(&SpectralField::zeros(&g), 0.0, 0.1, 11).unwrap();
        let out = apply_g(&zero, &zero, None, true).unwrap();
        assert!(out.snapshots().iter().all(|s| s.l2_norm() == 0.0));
        let (z, rep) = picard_solve_z(&zero, &params(), None, &PicardOptions::default()).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.contraction_factor.is_none());
        assert!(z.snapshots().iter().all(|s| s.l2_norm() == 0.0));
    }

    #[test]
    fn constant_single_mode_closed_form() {
        // v = eps cos x constant in time: G(0; v)(t) = (1 - e^{-t}) eps^2 sin(2x) / 10.
        let g = Grid::torus(32).unwrap();
        let eps = 1e-2;
        let v0 = SpectralField::from_fn(&g, |x| eps * x.cos());
        let h = 1e-3;
        let v = Trajectory::constant(&v0, 0.0, h, 2001).unwrap();
        let out = apply_g(&v.zeros_like(), &v, None, true).unwrap();
        for (i, s) in out.snapshots().iter().enumerate().step_by(250) {
            let t = i as f64 * h;
            let expected = SpectralField::from_fn(&g, |x| (1.0 - (-t).exp()) * eps * eps * (2.0 * x).sin() / 10.0);
            let err = (s - &expected).l2_norm();
            // trapezoid error is O(h^2) relative
            assert!(err <= 1e-6 * expected.l2_norm().max(1e-12) + 1e-18, "t = {t}: {err}");
            for k in [0, 1, 3, 4] {
                assert!(s.coeff(k).norm() < 1e-18);
            }
        }
    }

    #[test]
    fn quadratic_scaling_with_v_zero() {
        let g = Grid::new(64, 10.0).unwrap();
        let q0 = SpectralField::from_fn(&g, |x| (-(x * x) / 4.0).exp());
        let q = Trajectory::constant(&q0, 0.0, 0.05, 41).unwrap();
        let zero = q.zeros_like();
        let lam = 3.0;
        let base = apply_g(&q, &zero, None, true).unwrap();
        let scaled = apply_g(&q.map(|f| f.scaled(lam)), &zero, None, true).unwrap();
        let p = params();
        let a = imethod_y1_norm(&base, &p);
        let b = imethod_y1_norm(&scaled, &p);
        assert!((b - lam * lam * a).abs() <= 1e-10 * b);
    }

    #[test]
    fn mesh_mismatch() {
        let g = Grid::new(16, 1.0).unwrap();
        let a = Trajectory::constant(&SpectralField::zeros(&g), 0.0, 0.1, 5).unwrap();
        let b = Trajectory::constant(&SpectralField::zeros(&g), 0.0, 0.1, 6).unwrap();
        assert!(matches!(apply_g(&a, &b, None, true), Err(Error::MeshMismatch(_))));
    }

    #[test]
    fn window_check_requires_three_windows() {
        let g = Grid::new(16, 1.0).unwrap();
        let a = Trajectory::constant(&SpectralField::zeros(&g), 0.0, 0.5, 9).unwrap();
        assert!(window_bound_check(&a, &a, &params(), 2.0).is_err());
        assert!(window_bound_check(&a, &a, &params(), 1.0).is_ok());
    }

    #[test]
    fn zero_z_has_slack() {
        let g = Grid::new(128, 32.0).unwrap();
        let f = ForcingSpec::new(
            1e-3,
            SpatialProfile::Gaussian { sigma: 2.0, center: 0.0 },
            TemporalProfile::Cosine { period: 2.0 },
        )
        .unwrap();
        let v = linear_trajectory(&SpectralField::zeros(&g), &f, 6.0, 0.05, Variant::BbmDamped).unwrap();
        let check = window_bound_check(&v.zeros_like(), &v, &params(), 2.0).unwrap();
        assert!(check.all_pass());
        for w in &check.windows {
            assert!((w.shifted_bound - 2.0 * w.v_window).abs() < 1e-18);
        }
    }
}
