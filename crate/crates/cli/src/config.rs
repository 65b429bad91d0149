//! Run configuration: strict TOML with dotted sections, validated before any
//! compute.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use bbm_core::dynamics::{ForcingSpec, Integrator, SolverConfig, SpatialProfile, TemporalProfile, Variant};
use bbm_core::spectral::{Grid, ImethodParams, SpectralField};
use bbm_core::verification::{multiscale_profiles, split_seed, EquivalenceThresholds, Inequality, SpectrumProfile};

use crate::error::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    /// Output directory; `--out` and `BBM_ORBIT_OUT` take precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub grid: GridSection,
    #[serde(default)]
    pub equation: EquationSection,
    pub solver: SolverSection,
    #[serde(default)]
    pub imethod: ImethodSection,
    #[serde(default)]
    pub forcing: ForcingSection,
    #[serde(default)]
    pub initial: FieldSpec,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub picard: PicardSection,
    #[serde(default)]
    pub orbit: OrbitSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub stability: StabilitySection,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub m: usize,
    /// Half-period `L` of `[-L, L)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_length: Option<f64>,
    /// `L / pi`, as an alternative to `half_length`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_length_pi: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantName {
    #[default]
    BbmDamped,
    BbmBurgersTorus,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquationSection {
    pub variant: VariantName,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorName {
    ExpEuler,
    #[default]
    ExpRk2,
    Etdrk4,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub dt: f64,
    #[serde(default)]
    pub integrator: IntegratorName,
    #[serde(default = "yes")]
    pub dealias: bool,
    #[serde(default = "yes")]
    pub nonlinear: bool,
    #[serde(default = "one")]
    pub stride: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            dt: 0.01,
            integrator: IntegratorName::default(),
            dealias: true,
            nonlinear: true,
            stride: 1,
        }
    }
}

fn yes() -> bool {
    true
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImethodSection {
    pub ell: f64,
    pub n: f64,
    /// `N` values for `verify`.
    pub n_grid: Vec<f64>,
}

impl Default for ImethodSection {
    fn default() -> Self {
        Self {
            ell: 0.5,
            n: 4.0,
            n_grid: vec![8.0, 16.0, 32.0, 64.0],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpatialName {
    #[default]
    Gaussian,
    Mode,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemporalName {
    Constant,
    #[default]
    Cosine,
    Pulse,
}

/// `f(x, t) = amplitude * S(x) * T(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForcingSection {
    pub amplitude: f64,
    pub spatial: SpatialName,
    pub sigma: f64,
    pub center: f64,
    /// Wavenumber for `spatial = "mode"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<i64>,
    pub temporal: TemporalName,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pulse_center: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pulse_width: Option<f64>,
}

impl Default for ForcingSection {
    fn default() -> Self {
        Self {
            amplitude: 0.0,
            spatial: SpatialName::Gaussian,
            sigma: 2.0,
            center: 0.0,
            k: None,
            temporal: TemporalName::Cosine,
            period: Some(2.0),
            pulse_center: None,
            pulse_width: None,
        }
    }
}

/// A field given by kind. `norm`, when set, rescales the field to that
/// `H^ell` norm.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    #[default]
    Zero,
    /// `amplitude * exp(-(x - center)^2 / (2 width^2))`.
    Gaussian {
        #[serde(default = "unit")]
        amplitude: f64,
        #[serde(default)]
        center: f64,
        #[serde(default = "unit")]
        width: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        norm: Option<f64>,
    },
    /// Seeded random field with a power-law envelope `xi^{-alpha}` up to `max_xi`.
    Random {
        #[serde(default = "two")]
        alpha: f64,
        max_xi: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        norm: Option<f64>,
    },
    /// A `BBM1` binary dump; its grid must match `[grid]`.
    File {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        norm: Option<f64>,
    },
}

fn unit() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub t_end: f64,
    /// Window lengths `T` of the local well-posedness check on `[0, T]`.
    pub lwp_windows: Vec<f64>,
    /// Times at which `BBM1` snapshots are dumped; empty means start and end.
    pub dump_times: Vec<f64>,
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            t_end: 10.0,
            lwp_windows: vec![1.0],
            dump_times: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PicardSection {
    pub tol: f64,
    pub max_iter: usize,
    pub contraction_threshold: f64,
    /// Window length `T` and window count; the run spans `T * windows`.
    pub window: f64,
    pub windows: usize,
    /// Exit with a threshold failure when a window's contraction factor exceeds this.
    pub max_contraction: f64,
}

impl Default for PicardSection {
    fn default() -> Self {
        Self {
            tol: 1e-14,
            max_iter: 50,
            contraction_threshold: 0.1,
            window: 2.0,
            windows: 10,
            max_contraction: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitSection {
    /// Defaults to the forcing period.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    pub k_max: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for OrbitSection {
    fn default() -> Self {
        Self {
            theta: None,
            k_max: 40,
            abs_tol: 1e-9,
            rel_tol: 1e-9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityName {
    Equivalence,
    Bilinear,
    Trilinear,
}

impl InequalityName {
    pub fn inequality(self) -> Inequality {
        match self {
            Self::Equivalence => Inequality::Equivalence,
            Self::Bilinear => Inequality::Bilinear,
            Self::Trilinear => Inequality::Trilinear,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    WhiteBand { min_xi: f64, max_xi: f64 },
    PowerLaw { alpha: f64, max_xi: f64 },
    LocalizedBump { center_xi: f64, width_xi: f64 },
}

impl ProfileSpec {
    pub fn profile(&self) -> SpectrumProfile {
        match *self {
            Self::WhiteBand { min_xi, max_xi } => SpectrumProfile::WhiteBand { min_xi, max_xi },
            Self::PowerLaw { alpha, max_xi } => SpectrumProfile::PowerLaw { alpha, max_xi },
            Self::LocalizedBump { center_xi, width_xi } => SpectrumProfile::LocalizedBump { center_xi, width_xi },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub inequalities: Vec<InequalityName>,
    /// Sobolev indices; empty means `[imethod.ell]`.
    pub ell_grid: Vec<f64>,
    pub equivalence: EquivalenceSection,
    pub bilinear: BilinearSection,
    pub trilinear: TrilinearSection,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            inequalities: vec![
                InequalityName::Equivalence,
                InequalityName::Bilinear,
                InequalityName::Trilinear,
            ],
            ell_grid: Vec::new(),
            equivalence: EquivalenceSection::default(),
            bilinear: BilinearSection::default(),
            trilinear: TrilinearSection::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquivalenceSection {
    pub samples: usize,
    /// Sample `i` uses `profiles[i % len]`. Empty means the multiscale
    /// ensemble: power-law `alpha` samples interleaved with localized bumps
    /// at log-spaced centres up to `max_xi`.
    pub profiles: Vec<ProfileSpec>,
    pub alpha: f64,
    pub max_xi: f64,
    pub c_low: f64,
    pub c_high: f64,
    pub n_stability: f64,
}

impl Default for EquivalenceSection {
    fn default() -> Self {
        let t = EquivalenceThresholds::default();
        Self {
            samples: 200,
            profiles: Vec::new(),
            alpha: 1.0,
            max_xi: 256.0,
            c_low: t.c_low,
            c_high: t.c_high,
            n_stability: t.n_stability,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BilinearSection {
    pub pairs: usize,
    pub profile: ProfileSpec,
    pub t_grid: Vec<f64>,
    pub dt: f64,
    pub growth_limit: f64,
}

impl Default for BilinearSection {
    fn default() -> Self {
        Self {
            pairs: 20,
            profile: ProfileSpec::PowerLaw { alpha: 1.0, max_xi: 16.0 },
            t_grid: vec![1.0, 2.0, 4.0, 8.0],
            dt: 0.05,
            growth_limit: 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrilinearSection {
    pub samples: usize,
    pub pilot_samples: usize,
    pub epsilon: f64,
    pub safety: f64,
}

impl Default for TrilinearSection {
    fn default() -> Self {
        Self {
            samples: 40,
            pilot_samples: 40,
            epsilon: 0.25,
            safety: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilitySection {
    pub horizon: f64,
    pub fit_start: f64,
    pub fit_end: f64,
    pub epsilons: Vec<f64>,
    /// Perturbation shape; normalized to unit `H^ell` norm before scaling by epsilon.
    pub perturbation: FieldSpec,
    /// Accepted band `(gamma_min, gamma_max]` for the fitted rates.
    pub gamma_min: f64,
    pub gamma_max: f64,
    /// Runs the `a = 0` error-equation oracle; its rate must be within
    /// `oracle_tolerance` of 1.
    pub oracle: bool,
    pub oracle_tolerance: f64,
    pub absorbing: AbsorbingSection,
}

impl Default for StabilitySection {
    fn default() -> Self {
        Self {
            horizon: 16.0,
            fit_start: 2.0,
            fit_end: 14.0,
            epsilons: vec![1e-3, 1e-4],
            perturbation: FieldSpec::Gaussian {
                amplitude: 1.0,
                center: 5.0,
                width: 1.0,
                norm: None,
            },
            gamma_min: 0.9,
            gamma_max: 1.0,
            oracle: true,
            oracle_tolerance: 1e-3,
            absorbing: AbsorbingSection::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AbsorbingSection {
    pub enabled: bool,
    pub datum: FieldSpec,
    pub pilot_horizon: f64,
    pub horizon: f64,
    pub margin: f64,
    pub post_entry_window: f64,
}

impl Default for AbsorbingSection {
    fn default() -> Self {
        Self {
            enabled: true,
            datum: FieldSpec::Gaussian {
                amplitude: 1.0,
                center: 0.0,
                width: 2.0,
                norm: Some(10.0),
            },
            pilot_horizon: 20.0,
            horizon: 40.0,
            margin: 0.0,
            post_entry_window: 10.0,
        }
    }
}

/// Seed purposes for [`split_seed`].
pub mod purpose {
    pub const INITIAL: u64 = 1;
    pub const PERTURBATION: u64 = 2;
    pub const ABSORBING_DATUM: u64 = 3;
    pub const EQUIVALENCE: u64 = 10;
    pub const BILINEAR: u64 = 11;
    pub const TRILINEAR: u64 = 12;
    pub const TRILINEAR_PILOT: u64 = 13;
}

fn bad(path: impl Into<String>, reason: impl Into<String>) -> CliError {
    CliError::Config {
        path: path.into(),
        reason: reason.into(),
    }
}

fn positive(path: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(bad(path, format!("must be positive and finite, got {x}")))
    }
}

fn nonnegative(path: &str, x: f64) -> Result<(), CliError> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(bad(path, format!("must be nonnegative and finite, got {x}")))
    }
}

fn at_least_one(path: &str, n: usize) -> Result<(), CliError> {
    if n >= 1 {
        Ok(())
    } else {
        Err(bad(path, "must be at least 1"))
    }
}

fn validate_field(path: &str, spec: &FieldSpec) -> Result<(), CliError> {
    let norm = match spec {
        FieldSpec::Zero => None,
        FieldSpec::Gaussian { amplitude, width, norm, .. } => {
            if !amplitude.is_finite() {
                return Err(bad(format!("{path}.amplitude"), "must be finite"));
            }
            positive(&format!("{path}.width"), *width)?;
            *norm
        }
        FieldSpec::Random { alpha, max_xi, norm } => {
            if !alpha.is_finite() {
                return Err(bad(format!("{path}.alpha"), "must be finite"));
            }
            positive(&format!("{path}.max_xi"), *max_xi)?;
            *norm
        }
        FieldSpec::File { norm, .. } => *norm,
    };
    if let Some(n) = norm {
        nonnegative(&format!("{path}.norm"), n)?;
    }
    Ok(())
}

impl RunConfig {
    /// Parses TOML, rejecting unknown keys with their dotted path.
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let de = toml::Deserializer::parse(text).map_err(|e| bad("<document>", e.message().to_string()))?;
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let path = if path == "." { "<document>".to_string() } else { path };
            bad(path, e.inner().message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let g = &self.grid;
        if g.m < 8 || !g.m.is_multiple_of(2) {
            return Err(bad("grid.m", format!("must be even and at least 8, got {}", g.m)));
        }
        match (g.half_length, g.half_length_pi) {
            (Some(l), None) => positive("grid.half_length", l)?,
            (None, Some(l)) => positive("grid.half_length_pi", l)?,
            _ => return Err(bad("grid.half_length", "set exactly one of half_length, half_length_pi")),
        }

        let s = &self.solver;
        positive("solver.dt", s.dt)?;
        at_least_one("solver.stride", s.stride)?;

        let im = &self.imethod;
        if !(0.0..=1.0).contains(&im.ell) {
            return Err(bad("imethod.ell", format!("must lie in [0, 1], got {}", im.ell)));
        }
        if !(im.n >= 1.0 && im.n.is_finite()) {
            return Err(bad("imethod.n", format!("must be at least 1, got {}", im.n)));
        }
        for (i, &n) in im.n_grid.iter().enumerate() {
            if !(n >= 1.0 && n.is_finite()) {
                return Err(bad(format!("imethod.n_grid[{i}]"), format!("must be at least 1, got {n}")));
            }
        }

        let f = &self.forcing;
        if !f.amplitude.is_finite() {
            return Err(bad("forcing.amplitude", "must be finite"));
        }
        match f.spatial {
            SpatialName::Gaussian => positive("forcing.sigma", f.sigma)?,
            SpatialName::Mode => {
                let k = f.k.ok_or_else(|| bad("forcing.k", "required for spatial = \"mode\""))?;
                if k.unsigned_abs() as usize >= g.m / 2 {
                    return Err(bad("forcing.k", format!("|k| must be below M/2 = {}", g.m / 2)));
                }
            }
        }
        match f.temporal {
            TemporalName::Constant => {}
            TemporalName::Cosine => {
                positive("forcing.period", f.period.ok_or_else(|| bad("forcing.period", "required"))?)?
            }
            TemporalName::Pulse => {
                positive(
                    "forcing.pulse_width",
                    f.pulse_width.ok_or_else(|| bad("forcing.pulse_width", "required"))?,
                )?;
                if f.pulse_center.is_none() {
                    return Err(bad("forcing.pulse_center", "required"));
                }
            }
        }

        validate_field("initial", &self.initial)?;

        let sim = &self.simulate;
        positive("simulate.t_end", sim.t_end)?;
        for (i, &w) in sim.lwp_windows.iter().enumerate() {
            positive(&format!("simulate.lwp_windows[{i}]"), w)?;
            if w > sim.t_end {
                return Err(bad(format!("simulate.lwp_windows[{i}]"), "exceeds simulate.t_end"));
            }
        }
        for (i, &t) in sim.dump_times.iter().enumerate() {
            if !(0.0..=sim.t_end).contains(&t) {
                return Err(bad(format!("simulate.dump_times[{i}]"), "must lie in [0, t_end]"));
            }
        }

        let p = &self.picard;
        positive("picard.tol", p.tol)?;
        at_least_one("picard.max_iter", p.max_iter)?;
        positive("picard.contraction_threshold", p.contraction_threshold)?;
        positive("picard.window", p.window)?;
        if p.windows < 3 {
            return Err(bad("picard.windows", format!("must be at least 3, got {}", p.windows)));
        }
        positive("picard.max_contraction", p.max_contraction)?;

        let o = &self.orbit;
        if let Some(theta) = o.theta {
            positive("orbit.theta", theta)?;
            if let (TemporalName::Cosine, Some(period)) = (f.temporal, f.period) {
                if f.amplitude != 0.0 && (theta - period).abs() > 1e-12 * period {
                    return Err(bad("orbit.theta", format!("{theta} differs from forcing.period {period}")));
                }
            }
        }
        at_least_one("orbit.k_max", o.k_max)?;
        nonnegative("orbit.abs_tol", o.abs_tol)?;
        nonnegative("orbit.rel_tol", o.rel_tol)?;
        if o.abs_tol + o.rel_tol == 0.0 {
            return Err(bad("orbit.abs_tol", "abs_tol and rel_tol cannot both be zero"));
        }

        let v = &self.verify;
        for (i, &ell) in v.ell_grid.iter().enumerate() {
            if !(0.0..=1.0).contains(&ell) {
                return Err(bad(format!("verify.ell_grid[{i}]"), format!("must lie in [0, 1], got {ell}")));
            }
        }
        let e = &v.equivalence;
        at_least_one("verify.equivalence.samples", e.samples)?;
        for (i, p) in e.profiles.iter().enumerate() {
            p.profile()
                .validate()
                .map_err(|err| bad(format!("verify.equivalence.profiles[{i}]"), err.to_string()))?;
        }
        if !e.alpha.is_finite() {
            return Err(bad("verify.equivalence.alpha", "must be finite"));
        }
        positive("verify.equivalence.max_xi", e.max_xi)?;
        positive("verify.equivalence.c_low", e.c_low)?;
        positive("verify.equivalence.c_high", e.c_high)?;
        positive("verify.equivalence.n_stability", e.n_stability)?;
        let b = &v.bilinear;
        at_least_one("verify.bilinear.pairs", b.pairs)?;
        b.profile
            .profile()
            .validate()
            .map_err(|err| bad("verify.bilinear.profile", err.to_string()))?;
        if b.t_grid.is_empty() {
            return Err(bad("verify.bilinear.t_grid", "must not be empty"));
        }
        for (i, &t) in b.t_grid.iter().enumerate() {
            positive(&format!("verify.bilinear.t_grid[{i}]"), t)?;
        }
        positive("verify.bilinear.dt", b.dt)?;
        positive("verify.bilinear.growth_limit", b.growth_limit)?;
        let t = &v.trilinear;
        at_least_one("verify.trilinear.samples", t.samples)?;
        at_least_one("verify.trilinear.pilot_samples", t.pilot_samples)?;
        nonnegative("verify.trilinear.epsilon", t.epsilon)?;
        if !(t.safety >= 1.0) {
            return Err(bad("verify.trilinear.safety", format!("must be at least 1, got {}", t.safety)));
        }

        let st = &self.stability;
        positive("stability.horizon", st.horizon)?;
        if !(st.fit_start >= 0.0 && st.fit_end > st.fit_start && st.fit_end <= st.horizon) {
            return Err(bad(
                "stability.fit_end",
                "need 0 <= fit_start < fit_end <= horizon",
            ));
        }
        for (i, &eps) in st.epsilons.iter().enumerate() {
            nonnegative(&format!("stability.epsilons[{i}]"), eps)?;
        }
        validate_field("stability.perturbation", &st.perturbation)?;
        if matches!(st.perturbation, FieldSpec::Zero) {
            return Err(bad("stability.perturbation.kind", "perturbation shape must be nonzero"));
        }
        if !(st.gamma_max > st.gamma_min) {
            return Err(bad("stability.gamma_max", "must exceed gamma_min"));
        }
        positive("stability.oracle_tolerance", st.oracle_tolerance)?;
        let a = &st.absorbing;
        validate_field("stability.absorbing.datum", &a.datum)?;
        positive("stability.absorbing.pilot_horizon", a.pilot_horizon)?;
        positive("stability.absorbing.horizon", a.horizon)?;
        nonnegative("stability.absorbing.margin", a.margin)?;
        positive("stability.absorbing.post_entry_window", a.post_entry_window)?;
        Ok(())
    }

    pub fn half_length(&self) -> f64 {
        self.grid
            .half_length
            .unwrap_or_else(|| PI * self.grid.half_length_pi.unwrap_or(1.0))
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        Grid::new(self.grid.m, self.half_length()).map_err(|e| bad("grid", e.to_string()))
    }

    pub fn imethod(&self) -> Result<ImethodParams, CliError> {
        ImethodParams::new(self.imethod.ell, self.imethod.n).map_err(|e| bad("imethod", e.to_string()))
    }

    pub fn variant(&self) -> Variant {
        match self.equation.variant {
            VariantName::BbmDamped => Variant::BbmDamped,
            VariantName::BbmBurgersTorus => Variant::BbmBurgersTorus,
        }
    }

    pub fn solver_config(&self) -> Result<SolverConfig, CliError> {
        let s = &self.solver;
        let mut cfg = SolverConfig::new(s.dt)
            .map_err(|e| bad("solver.dt", e.to_string()))?
            .with_integrator(match s.integrator {
                IntegratorName::ExpEuler => Integrator::ExpEuler,
                IntegratorName::ExpRk2 => Integrator::ExpRk2,
                IntegratorName::Etdrk4 => Integrator::Etdrk4,
            })
            .with_variant(self.variant())
            .with_stride(s.stride)
            .with_imethod(self.imethod()?);
        cfg.dealias = s.dealias;
        if !s.nonlinear {
            cfg = cfg.linear_only();
        }
        Ok(cfg)
    }

    pub fn forcing(&self) -> Result<ForcingSpec, CliError> {
        let f = &self.forcing;
        let spatial = match f.spatial {
            SpatialName::Gaussian => SpatialProfile::Gaussian {
                sigma: f.sigma,
                center: f.center,
            },
            SpatialName::Mode => SpatialProfile::Mode { k: f.k.unwrap_or(0) },
        };
        let temporal = match f.temporal {
            TemporalName::Constant => TemporalProfile::Constant,
            TemporalName::Cosine => TemporalProfile::Cosine {
                period: f.period.unwrap_or(1.0),
            },
            TemporalName::Pulse => TemporalProfile::Pulse {
                center: f.pulse_center.unwrap_or(0.0),
                width: f.pulse_width.unwrap_or(1.0),
            },
        };
        ForcingSpec::new(f.amplitude, spatial, temporal).map_err(|e| bad("forcing", e.to_string()))
    }

    /// Poincaré period: `orbit.theta`, else the forcing period.
    pub fn theta(&self) -> Result<f64, CliError> {
        if let Some(theta) = self.orbit.theta {
            return Ok(theta);
        }
        self.forcing()?
            .period()
            .ok_or_else(|| bad("orbit.theta", "required when the forcing is not periodic"))
    }

    /// Builds a field on `grid`; `purpose` selects the seed stream of random fields.
    pub fn field(&self, path: &str, spec: &FieldSpec, grid: &Grid, purpose: u64) -> Result<SpectralField, CliError> {
        let (field, norm) = match spec {
            FieldSpec::Zero => (SpectralField::zeros(grid), None),
            FieldSpec::Gaussian {
                amplitude,
                center,
                width,
                norm,
            } => (
                SpectralField::from_fn(grid, |x| amplitude * (-(x - center) * (x - center) / (2.0 * width * width)).exp()),
                *norm,
            ),
            FieldSpec::Random { alpha, max_xi, norm } => {
                let profile = SpectrumProfile::PowerLaw {
                    alpha: *alpha,
                    max_xi: *max_xi,
                };
                let mut fields = bbm_core::verification::sample_fields(split_seed(self.seed, purpose), 1, grid, &profile)
                    .map_err(|e| bad(path, e.to_string()))?;
                (fields.remove(0), *norm)
            }
            FieldSpec::File { path: file, norm } => {
                let reader = std::fs::File::open(file)
                    .map_err(|e| bad(format!("{path}.path"), format!("cannot open {}: {e}", file.display())))?;
                let field = bbm_core::io::read_field_binary(std::io::BufReader::new(reader))
                    .map_err(|e| bad(format!("{path}.path"), e.to_string()))?;
                if !field.grid().same_as(grid) {
                    return Err(bad(format!("{path}.path"), "dump grid differs from [grid]"));
                }
                (field, *norm)
            }
        };
        match norm {
            None => Ok(field),
            Some(target) => {
                let current = field.sobolev_norm(self.imethod.ell);
                if current == 0.0 {
                    if target == 0.0 {
                        return Ok(field);
                    }
                    return Err(bad(format!("{path}.norm"), "cannot rescale a zero field"));
                }
                Ok(field.scaled(target / current))
            }
        }
    }

    pub fn equivalence_thresholds(&self) -> EquivalenceThresholds {
        let e = &self.verify.equivalence;
        EquivalenceThresholds {
            c_low: e.c_low,
            c_high: e.c_high,
            n_stability: e.n_stability,
        }
    }

    pub fn equivalence_profiles(&self) -> Vec<SpectrumProfile> {
        let e = &self.verify.equivalence;
        if e.profiles.is_empty() {
            multiscale_profiles(e.alpha, e.max_xi)
        } else {
            e.profiles.iter().map(ProfileSpec::profile).collect()
        }
    }

    pub fn ell_grid(&self) -> Vec<f64> {
        if self.verify.ell_grid.is_empty() {
            vec![self.imethod.ell]
        } else {
            self.verify.ell_grid.clone()
        }
    }

    /// SHA-256 of the normalized configuration (defaults filled in, output
    /// directory dropped) with the effective seed.
    pub fn hash(&self) -> String {
        let mut normalized = self.clone();
        normalized.out = None;
        let text = serde_json::to_string(&normalized).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(text.as_bytes());
        hex::encode(hasher.finalize())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[grid]\nm = 64\nhalf_length_pi = 4\n[solver]\ndt = 0.05\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.imethod.ell, 0.5);
        assert_eq!(cfg.initial, FieldSpec::Zero);
        assert!((cfg.half_length() - 4.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn unknown_keys_name_their_path() {
        let text = format!("{MINIMAL}bogus = 1\n");
        match RunConfig::from_toml(&text) {
            Err(CliError::Config { path, .. }) => assert_eq!(path, "solver.bogus"),
            other => panic!("{other:?}"),
        }
        let text = format!("{MINIMAL}[stability.absorbing]\nhorizn = 3\n");
        match RunConfig::from_toml(&text) {
            Err(CliError::Config { path, .. }) => assert_eq!(path, "stability.absorbing.horizn"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn validation_names_field() {
        let text = MINIMAL.replace("dt = 0.05", "dt = -1");
        match RunConfig::from_toml(&text) {
            Err(CliError::Config { path, .. }) => assert_eq!(path, "solver.dt"),
            other => panic!("{other:?}"),
        }
        let text = format!("{MINIMAL}[initial]\nkind = \"gaussian\"\nwidth = 0\n");
        match RunConfig::from_toml(&text) {
            Err(CliError::Config { path, .. }) => assert_eq!(path, "initial.width"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn hash_ignores_out_and_formatting() {
        let a = RunConfig::from_toml(MINIMAL).unwrap();
        let mut b = RunConfig::from_toml(&format!("# comment\n{MINIMAL}[imethod]\nell = 0.5\n")).unwrap();
        assert_eq!(a.hash(), b.hash());
        b.out = Some("elsewhere".into());
        assert_eq!(a.hash(), b.hash());
        b.seed = 3;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn normalized_field() {
        let text = format!("{MINIMAL}[initial]\nkind = \"gaussian\"\nwidth = 2\nnorm = 10\n");
        let cfg = RunConfig::from_toml(&text).unwrap();
        let g = cfg.grid().unwrap();
        let f = cfg.field("initial", &cfg.initial, &g, purpose::INITIAL).unwrap();
        assert!((f.sobolev_norm(0.5) - 10.0).abs() < 1e-12);
    }
}
