//! Time stepping of the damped forced BBM equation
//!
//! ```text
//! u_t - u_xxt + u - u_xx + u u_x = f
//! ```
//!
//! Dividing by `1 + xi^2` in Fourier variables gives
//! `c_k' = -c_k + (1 + xi_k^2)^{-1} (f_k - (i xi_k / 2) (u^2)_k)`: the linear
//! part is the mode-uniform damping `-1`. The torus variant
//! `u_t - u_txx - u_xx + u_x + u u_x = f` has the linear symbol
//! `-(xi^2 + i xi) / (1 + xi^2)` and the same nonlinear term.
//!
//! When the forcing has a closed-form linear response `P(t)` (constant or
//! cosine in time) the solver integrates `y = u - P`, for which
//! `y' = lambda y + N(y + P(t))`. The forced linear problem is then resolved
//! without time-discretization error.

use rustfft::num_complex::Complex64;

use super::etd::{EtdStepper, Integrator};
use super::forcing::{ForcingSpec, TemporalProfile};
use super::trajectory::Trajectory;
use crate::error::{invalid, Error, Result};
use crate::spectral::{Grid, ImethodParams, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    BbmDamped,
    BbmBurgersTorus,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Self::BbmDamped => "bbm_damped",
            Self::BbmBurgersTorus => "bbm_burgers_torus",
        }
    }

    /// Linear symbol `lambda(xi)`.
    pub fn linear_symbol(&self, xi: f64) -> Complex64 {
        match self {
            Self::BbmDamped => Complex64::new(-1.0, 0.0),
            Self::BbmBurgersTorus => Complex64::new(-xi * xi, -xi) / (1.0 + xi * xi),
        }
    }

    /// Per-mode linear symbols in storage order (Nyquist takes the real part).
    pub fn linear_symbols(&self, grid: &Grid) -> Vec<Complex64> {
        let nyq = grid.nyquist_index();
        grid.xi()
            .iter()
            .enumerate()
            .map(|(i, &xi)| {
                let l = self.linear_symbol(xi);
                if i == nyq {
                    Complex64::new(l.re, 0.0)
                } else {
                    l
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub variant: Variant,
    pub integrator: Integrator,
    pub dealias: bool,
    /// Disables `u u_x`; the remaining problem is linear.
    pub nonlinear: bool,
    /// Keep every `stride`-th step in the returned trajectory.
    pub stride: usize,
    /// I-method parameters used for diagnostics.
    pub imethod: ImethodParams,
}

impl SolverConfig {
    pub fn new(dt: f64) -> Result<Self> {
        let cfg = Self {
            dt,
            variant: Variant::BbmDamped,
            integrator: Integrator::ExpRk2,
            dealias: true,
            nonlinear: true,
            stride: 1,
            imethod: ImethodParams::new(0.5, 4.0)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("solver.dt", format!("must be positive, got {}", self.dt)));
        }
        if self.stride == 0 {
            return Err(invalid("solver.stride", "must be at least 1"));
        }
        Ok(())
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride;
        self
    }

    pub fn with_imethod(mut self, imethod: ImethodParams) -> Self {
        self.imethod = imethod;
        self
    }

    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }
}

/// Number of steps of size `dt` spanning `span`, if `dt` divides it.
pub(crate) fn step_count(span: f64, dt: f64) -> Result<usize> {
    if !(span > 0.0) {
        return Err(invalid("t1", format!("end time must exceed start time (span {span})")));
    }
    let n = (span / dt).round();
    if n < 1.0 || (n * dt - span).abs() > 1e-10 * span.max(1.0) {
        return Err(invalid("solver.dt", format!("dt = {dt} does not divide the span {span}")));
    }
    Ok(n as usize)
}

/// Symbol of `u -> -(1/2) (I - d_xx)^{-1} d_x` applied to `u^2`.
fn convection_symbols(grid: &Grid) -> Vec<Complex64> {
    let nyq = grid.nyquist_index();
    grid.xi()
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            if i == nyq {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -0.5 * xi / (1.0 + xi * xi))
            }
        })
        .collect()
}

/// `-(1/2) (I - d_xx)^{-1} d_x (u^2)`.
pub fn convection(u: &SpectralField, dealias: bool) -> SpectralField {
    let sym = convection_symbols(u.grid());
    let mut sq = u.square(dealias);
    for (c, s) in sq.coeffs_mut().iter_mut().zip(&sym) {
        *c *= s;
    }
    sq
}

/// Time derivative `c_k' = lambda_k c_k + (1 + xi_k^2)^{-1} (f_k - (i xi_k/2)(u^2)_k)`.
pub fn rhs(u: &SpectralField, f_t: &SpectralField, variant: Variant, dealias: bool) -> Result<SpectralField> {
    u.check_grid(f_t)?;
    let lambda = variant.linear_symbols(u.grid());
    let mut out = convection(u, dealias);
    out.axpy(1.0, &f_t.helmholtz_inverse())?;
    for ((o, c), l) in out.coeffs_mut().iter_mut().zip(u.coeffs()).zip(&lambda) {
        *o += l * c;
    }
    Ok(out)
}

/// Closed-form particular solution `P(t)` of `P' = lambda P + H f(t)`.
#[derive(Clone)]
struct Particular {
    lambda: Vec<Complex64>,
    /// `(1 + xi^2)^{-1} A S`, the forcing as seen by the ODE.
    g: Vec<Complex64>,
    forcing: ForcingSpec,
}

impl Particular {
    fn new(forcing: &ForcingSpec, grid: &Grid, lambda: &[Complex64]) -> Option<Self> {
        match forcing.temporal {
            TemporalProfile::Constant | TemporalProfile::Cosine { .. } => {}
            TemporalProfile::Pulse { .. } => return None,
        }
        let g = forcing.spatial_field(grid).helmholtz_inverse().into_coeffs();
        Some(Self {
            lambda: lambda.to_vec(),
            g,
            forcing: *forcing,
        })
    }

    fn eval(&self, grid: &Grid, t: f64) -> SpectralField {
        let coeffs = match self.forcing.temporal {
            TemporalProfile::Constant => self
                .g
                .iter()
                .zip(&self.lambda)
                .map(|(&g, &l)| if l.norm() == 0.0 { g * t } else { -g / l })
                .collect(),
            TemporalProfile::Cosine { .. } => {
                let omega = self.forcing.omega().expect("cosine");
                let phase = self.forcing.phase(t).expect("cosine");
                let e = Complex64::from_polar(1.0, phase);
                let iw = Complex64::new(0.0, omega);
                self.g
                    .iter()
                    .zip(&self.lambda)
                    .map(|(&g, &l)| g * 0.5 * (e / (iw - l) + e.conj() / (-iw - l)))
                    .collect()
            }
            TemporalProfile::Pulse { .. } => unreachable!("pulse has no particular solution"),
        };
        SpectralField::from_coeffs(grid, coeffs).expect("grid length")
    }
}

/// Exact solution of the linear problem `v_t - v_txx + v - v_xx = f`
/// (or the torus variant) at time `t`, from `v(0) = phi`.
pub fn linear_evolve(phi: &SpectralField, forcing: &ForcingSpec, t: f64, variant: Variant) -> Result<SpectralField> {
    let grid = phi.grid();
    let lambda = variant.linear_symbols(grid);
    let decay = |l: &Complex64| (l * t).exp();
    if forcing.is_zero() {
        let coeffs = phi.coeffs().iter().zip(&lambda).map(|(c, l)| c * decay(l)).collect();
        return SpectralField::from_coeffs(grid, coeffs);
    }
    let particular = Particular::new(forcing, grid, &lambda)
        .ok_or(Error::UnsupportedProfile(forcing.temporal.name()))?;
    let p0 = particular.eval(grid, 0.0);
    let pt = particular.eval(grid, t);
    let coeffs = phi
        .coeffs()
        .iter()
        .zip(p0.coeffs())
        .zip(pt.coeffs())
        .zip(&lambda)
        .map(|(((c, a), b), l)| (c - a) * decay(l) + b)
        .collect();
    SpectralField::from_coeffs(grid, coeffs)
}

/// [`linear_evolve`] sampled on `t = 0, dt, ..., t1`.
pub fn linear_trajectory(
    phi: &SpectralField,
    forcing: &ForcingSpec,
    t1: f64,
    dt: f64,
    variant: Variant,
) -> Result<Trajectory> {
    let n = step_count(t1, dt)?;
    let snapshots = (0..=n)
        .map(|i| linear_evolve(phi, forcing, i as f64 * dt, variant))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(0.0, dt, snapshots)
}

/// Reusable time stepper for one grid and configuration.
pub struct Solver {
    cfg: SolverConfig,
    grid: Grid,
    lambda: Vec<Complex64>,
    stepper: EtdStepper,
}

impl Solver {
    pub fn new(grid: &Grid, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let lambda = cfg.variant.linear_symbols(grid);
        let stepper = EtdStepper::new(cfg.integrator, cfg.dt, &lambda);
        Ok(Self {
            cfg: cfg.clone(),
            grid: grid.clone(),
            lambda,
            stepper,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Integrates from `u0` at `t0` to `t1`, keeping every `stride`-th step.
    pub fn evolve(&self, u0: &SpectralField, forcing: &ForcingSpec, t0: f64, t1: f64) -> Result<Trajectory> {
        let n = step_count(t1 - t0, self.cfg.dt)?;
        let stride = self.cfg.stride;
        if n % stride != 0 {
            return Err(invalid(
                "solver.stride",
                format!("stride {stride} does not divide the {n} steps"),
            ));
        }
        let mut snapshots = Vec::with_capacity(n / stride + 1);
        snapshots.push(u0.clone());
        self.run(u0, forcing, t0, n, |i, u| {
            if i % stride == 0 {
                snapshots.push(u.clone());
            }
        })?;
        Trajectory::new(t0, self.cfg.dt * stride as f64, snapshots)
    }

    /// State at `t1` only.
    pub fn evolve_final(&self, u0: &SpectralField, forcing: &ForcingSpec, t0: f64, t1: f64) -> Result<SpectralField> {
        let n = step_count(t1 - t0, self.cfg.dt)?;
        let mut last = u0.clone();
        self.run(u0, forcing, t0, n, |i, u| {
            if i == n {
                last = u.clone();
            }
        })?;
        Ok(last)
    }

    fn run(
        &self,
        u0: &SpectralField,
        forcing: &ForcingSpec,
        t0: f64,
        n: usize,
        mut visit: impl FnMut(usize, &SpectralField),
    ) -> Result<()> {
        if !u0.grid().same_as(&self.grid) {
            return Err(Error::Dimension("initial datum on a different grid".into()));
        }
        let dt = self.cfg.dt;
        let dealias = self.cfg.dealias;
        let nonlinear = self.cfg.nonlinear;
        let grid = &self.grid;
        let particular = if forcing.is_zero() {
            None
        } else {
            Particular::new(forcing, grid, &self.lambda)
        };
        // Forcing that is not absorbed into P(t) enters the nonlinear slot.
        let direct_forcing = (!forcing.is_zero() && particular.is_none())
            .then(|| forcing.spatial_field(grid).helmholtz_inverse());

        let shift = |t: f64| particular.as_ref().map(|p| p.eval(grid, t));
        let mut nl = |y: &SpectralField, t: f64| -> Result<SpectralField> {
            let mut out = if nonlinear {
                match shift(t) {
                    Some(p) => convection(&(y + &p), dealias),
                    None => convection(y, dealias),
                }
            } else {
                SpectralField::zeros(grid)
            };
            if let Some(h) = &direct_forcing {
                out.axpy(forcing.temporal_factor(t), h)?;
            }
            Ok(out)
        };

        let mut y = match shift(t0) {
            Some(p) => u0 - &p,
            None => u0.clone(),
        };
        for i in 1..=n {
            let t = t0 + (i - 1) as f64 * dt;
            y = self.stepper.step(&y, t, &mut nl)?;
            let t_next = t0 + i as f64 * dt;
            if !y.is_finite() {
                return Err(Error::Divergence { step: i, time: t_next });
            }
            let u = match shift(t_next) {
                Some(p) => &y + &p,
                None => y.clone(),
            };
            visit(i, &u);
        }
        Ok(())
    }
}

/// One-shot [`Solver::evolve`].
pub fn evolve(
    u0: &SpectralField,
    forcing: &ForcingSpec,
    t0: f64,
    t1: f64,
    cfg: &SolverConfig,
) -> Result<Trajectory> {
    Solver::new(u0.grid(), cfg)?.evolve(u0, forcing, t0, t1)
}

/// Empirical constant of the local well-posedness bound
/// `||u||_{Y^ell_{tau,T}} <= C (||phi||_{H^ell} + sup_t ||f(t)||)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LwpReport {
    pub lhs: f64,
    pub rhs_raw: f64,
    pub ratio: f64,
}

pub fn lwp_bound_check(
    traj: &Trajectory,
    phi: &SpectralField,
    forcing: &ForcingSpec,
    ell: f64,
    tau: f64,
    duration: f64,
) -> Result<LwpReport> {
    let lhs = traj.y_norm(ell, tau, duration)?;
    let rhs_raw = phi.sobolev_norm(ell) + forcing.sup_l2(phi.grid());
    let ratio = if rhs_raw == 0.0 { 0.0 } else { lhs / rhs_raw };
    Ok(LwpReport { lhs, rhs_raw, ratio })
}

/// Spread (max / min) of the empirical constants across a data-size sweep.
#[derive(Clone, Debug)]
pub struct LwpSweep {
    pub reports: Vec<LwpReport>,
    pub spread: f64,
    /// Set when the spread exceeds the configured tolerance.
    pub blow_up: bool,
}

pub fn lwp_sweep_summary(reports: Vec<LwpReport>, tolerance: f64) -> LwpSweep {
    let positive: Vec<f64> = reports.iter().map(|r| r.ratio).filter(|&r| r > 0.0).collect();
    let spread = if positive.is_empty() {
        1.0
    } else {
        let max = positive.iter().copied().fold(f64::MIN, f64::max);
        let min = positive.iter().copied().fold(f64::MAX, f64::min);
        max / min
    };
    LwpSweep {
        blow_up: !spread.is_finite() || spread > 1.0 + tolerance,
        reports,
        spread,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::forcing::SpatialProfile;

    #[test]
    fn rhs_trivial_cases() {
        let g = Grid::new(64, 10.0).unwrap();
        let zero = SpectralField::zeros(&g);
        let r = rhs(&zero, &zero, Variant::BbmDamped, true).unwrap();
        assert_eq!(r.max_abs_diff(&zero), 0.0);

        let f = SpectralField::from_fn(&g, |x| (-x * x).exp());
        let r = rhs(&zero, &f, Variant::BbmDamped, true).unwrap();
        assert!(r.max_abs_diff(&f.helmholtz_inverse()) < 1e-16);
    }

    #[test]
    fn rhs_second_mode_by_hand() {
        // u = eps cos x: u^2 = eps^2 (1 + cos 2x) / 2, so (u^2)_{2} = eps^2 / 4 and the
        // mode-2 rhs is -(1/2) i 2 (eps^2/4) / 5 = -i eps^2 / 20.
        let g = Grid::torus(32).unwrap();
        let eps = 1e-3;
        let u = SpectralField::from_fn(&g, |x| eps * x.cos());
        let zero = SpectralField::zeros(&g);
        let r = rhs(&u, &zero, Variant::BbmDamped, true).unwrap();
        assert!((r.coeff(1) - Complex64::new(-eps / 2.0, 0.0)).norm() < 1e-18);
        assert!((r.coeff(2) - Complex64::new(0.0, -eps * eps / 20.0)).norm() < 1e-19);
        assert!((r.coeff(-2) - Complex64::new(0.0, eps * eps / 20.0)).norm() < 1e-19);
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = Grid::new(32, 5.0).unwrap();
        let cfg = SolverConfig::new(0.1).unwrap();
        let tr = evolve(&SpectralField::zeros(&g), &ForcingSpec::zero(), 0.0, 2.0, &cfg).unwrap();
        assert_eq!(tr.len(), 21);
        assert!(tr.snapshots().iter().all(|s| s.l2_norm() == 0.0));
    }

    #[test]
    fn tiny_sine_one_step_damps_by_exp_minus_dt() {
        let g = Grid::torus(32).unwrap();
        let u0 = SpectralField::from_fn(&g, |x| 1e-8 * x.sin());
        let cfg = SolverConfig::new(0.05).unwrap().with_integrator(Integrator::ExpEuler);
        let tr = evolve(&u0, &ForcingSpec::zero(), 0.0, 0.05, &cfg).unwrap();
        let factor = tr.last().coeff(1).im / u0.coeff(1).im;
        assert!((factor - (-0.05f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn step_count_rejects_non_divisors() {
        assert_eq!(step_count(20.0, 0.01).unwrap(), 2000);
        assert!(step_count(1.0, 0.3).is_err());
        assert!(step_count(-1.0, 0.1).is_err());
        let g = Grid::new(16, 1.0).unwrap();
        let cfg = SolverConfig::new(0.1).unwrap().with_stride(3);
        assert!(evolve(&SpectralField::zeros(&g), &ForcingSpec::zero(), 0.0, 1.0, &cfg).is_err());
    }

    #[test]
    fn divergence_is_reported_with_step() {
        let g = Grid::new(32, 2.0).unwrap();
        let u0 = SpectralField::from_fn(&g, |x| 1e6 * (-(x * x) * 4.0).exp());
        let cfg = SolverConfig::new(0.5).unwrap().with_integrator(Integrator::ExpEuler);
        let err = evolve(&u0, &ForcingSpec::zero(), 0.0, 200.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::Divergence { step, .. } if step >= 1));
    }

    #[test]
    fn linear_closed_forms() {
        let g = Grid::new(64, 8.0).unwrap();
        let phi = SpectralField::from_fn(&g, |x| (-(x * x) / 2.0).exp());
        let t = 1.7;
        let v = linear_evolve(&phi, &ForcingSpec::zero(), t, Variant::BbmDamped).unwrap();
        assert!(v.max_abs_diff(&phi.scaled((-t).exp())) < 1e-16);

        let f = ForcingSpec::new(0.3, SpatialProfile::Gaussian { sigma: 1.0, center: 1.0 }, TemporalProfile::Constant).unwrap();
        let v = linear_evolve(&SpectralField::zeros(&g), &f, t, Variant::BbmDamped).unwrap();
        let expected = f.spatial_field(&g).helmholtz_inverse().scaled(1.0 - (-t).exp());
        assert!(v.max_abs_diff(&expected) < 1e-16);
    }

    #[test]
    fn pulse_has_no_closed_form() {
        let g = Grid::new(16, 1.0).unwrap();
        let f = ForcingSpec::new(
            1.0,
            SpatialProfile::Mode { k: 1 },
            TemporalProfile::Pulse { center: 1.0, width: 0.2 },
        )
        .unwrap();
        let err = linear_evolve(&SpectralField::zeros(&g), &f, 1.0, Variant::BbmDamped).unwrap_err();
        assert!(matches!(err, Error::UnsupportedProfile("pulse")));
        // still integrable by the stepper
        let cfg = SolverConfig::new(0.01).unwrap().linear_only();
        assert!(evolve(&SpectralField::zeros(&g), &f, 0.0, 2.0, &cfg).is_ok());
    }

    #[test]
    fn lwp_zero_data() {
        let g = Grid::new(16, 1.0).unwrap();
        let zero = SpectralField::zeros(&g);
        let tr = Trajectory::constant(&zero, 0.0, 0.1, 11).unwrap();
        let r = lwp_bound_check(&tr, &zero, &ForcingSpec::zero(), 0.5, 0.0, 1.0).unwrap();
        assert_eq!(r.ratio, 0.0);
    }
}
