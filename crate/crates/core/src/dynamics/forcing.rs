use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::spectral::{Grid, SpectralField};

/// Spatial shape `S(x)` of the forcing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpatialProfile {
    /// `exp(-(x - center)^2 / (2 sigma^2))`.
    Gaussian { sigma: f64, center: f64 },
    /// `cos(xi_k x)` for the grid wavenumber `k`.
    Mode { k: i64 },
}

/// Temporal factor `T(t)` of the forcing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TemporalProfile {
    Constant,
    /// `cos(2 pi t / period)`, evaluated on `t mod period`.
    Cosine { period: f64 },
    /// `exp(-(t - center)^2 / (2 width^2))`. Has no closed-form linear response.
    Pulse { center: f64, width: f64 },
}

impl TemporalProfile {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Constant => "constant",
            Self::Cosine { .. } => "cosine",
            Self::Pulse { .. } => "pulse",
        }
    }
}

/// Separable forcing `f(x, t) = A S(x) T(t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForcingSpec {
    pub amplitude: f64,
    pub spatial: SpatialProfile,
    pub temporal: TemporalProfile,
}

impl ForcingSpec {
    pub fn new(amplitude: f64, spatial: SpatialProfile, temporal: TemporalProfile) -> Result<Self> {
        if !amplitude.is_finite() {
            return Err(invalid("forcing.amplitude", "must be finite"));
        }
        match spatial {
            SpatialProfile::Gaussian { sigma, center } => {
                if !(sigma > 0.0 && sigma.is_finite() && center.is_finite()) {
                    return Err(invalid("forcing.spatial.sigma", format!("must be positive, got {sigma}")));
                }
            }
            SpatialProfile::Mode { .. } => {}
        }
        match temporal {
            TemporalProfile::Constant => {}
            TemporalProfile::Cosine { period } => {
                if !(period > 0.0 && period.is_finite()) {
                    return Err(invalid("forcing.temporal.period", format!("must be positive, got {period}")));
                }
            }
            TemporalProfile::Pulse { center, width } => {
                if !(width > 0.0 && width.is_finite() && center.is_finite()) {
                    return Err(invalid("forcing.temporal.width", format!("must be positive, got {width}")));
                }
            }
        }
        Ok(Self {
            amplitude,
            spatial,
            temporal,
        })
    }

    pub fn zero() -> Self {
        Self {
            amplitude: 0.0,
            spatial: SpatialProfile::Gaussian {
                sigma: 1.0,
                center: 0.0,
            },
            temporal: TemporalProfile::Constant,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0
    }

    pub fn period(&self) -> Option<f64> {
        match self.temporal {
            TemporalProfile::Cosine { period } => Some(period),
            _ => None,
        }
    }

    /// Angular frequency of a cosine profile.
    pub fn omega(&self) -> Option<f64> {
        self.period().map(|p| 2.0 * PI / p)
    }

    /// Phase `omega (t mod theta)` of a cosine profile; exactly periodic in `t`
    /// whenever `t + theta` is representable.
    pub(crate) fn phase(&self, t: f64) -> Option<f64> {
        self.period()
            .map(|period| 2.0 * PI * t.rem_euclid(period) / period)
    }

    pub fn temporal_factor(&self, t: f64) -> f64 {
        match self.temporal {
            TemporalProfile::Constant => 1.0,
            TemporalProfile::Cosine { .. } => self.phase(t).expect("cosine has a period").cos(),
            TemporalProfile::Pulse { center, width } => {
                let s = (t - center) / width;
                (-0.5 * s * s).exp()
            }
        }
    }

    pub fn spatial_value(&self, x: f64, grid: &Grid) -> f64 {
        match self.spatial {
            SpatialProfile::Gaussian { sigma, center } => {
                let s = (x - center) / sigma;
                (-0.5 * s * s).exp()
            }
            SpatialProfile::Mode { k } => (PI * k as f64 / grid.half_length() * x).cos(),
        }
    }

    pub fn eval(&self, x: f64, t: f64, grid: &Grid) -> f64 {
        self.amplitude * self.spatial_value(x, grid) * self.temporal_factor(t)
    }

    /// `A S` as a field (the temporal factor excluded).
    pub fn spatial_field(&self, grid: &Grid) -> SpectralField {
        SpectralField::from_fn(grid, |x| self.amplitude * self.spatial_value(x, grid))
    }

    /// The snapshot `f(., t)`.
    pub fn snapshot(&self, grid: &Grid, t: f64) -> SpectralField {
        self.spatial_field(grid).scaled(self.temporal_factor(t))
    }

    /// `sup_t ||f(t)||_{L^2}`; every temporal profile peaks at 1.
    pub fn sup_l2(&self, grid: &Grid) -> f64 {
        self.spatial_field(grid).l2_norm()
    }
}
