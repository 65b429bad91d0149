use crate::error::{invalid, Error, Result};
use crate::spectral::{Grid, SpectralField};

/// Uniformly spaced snapshots `u(t0 + i dt)`, all on one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    t0: f64,
    dt: f64,
    snapshots: Vec<SpectralField>,
}

/// Relative tolerance for matching a time to a snapshot index.
const TIME_MATCH_TOL: f64 = 1e-9;

impl Trajectory {
    pub fn new(t0: f64, dt: f64, snapshots: Vec<SpectralField>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid("dt", format!("snapshot spacing must be positive, got {dt}")));
        }
        if snapshots.is_empty() {
            return Err(invalid("snapshots", "trajectory needs at least one snapshot"));
        }
        let grid = snapshots[0].grid();
        if snapshots.iter().any(|s| !s.grid().same_as(grid)) {
            return Err(Error::Dimension("snapshots on different grids".into()));
        }
        Ok(Self { t0, dt, snapshots })
    }

    /// A constant-in-time trajectory.
    pub fn constant(field: &SpectralField, t0: f64, dt: f64, len: usize) -> Result<Self> {
        Self::new(t0, dt, vec![field.clone(); len])
    }

    pub fn zeros_like(&self) -> Self {
        let zero = SpectralField::zeros(self.grid());
        Self {
            t0: self.t0,
            dt: self.dt,
            snapshots: vec![zero; self.snapshots.len()],
        }
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.snapshots.len() - 1)
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + self.dt * i as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }

    pub fn grid(&self) -> &Grid {
        self.snapshots[0].grid()
    }

    pub fn snapshots(&self) -> &[SpectralField] {
        &self.snapshots
    }

    pub fn snapshot(&self, i: usize) -> &SpectralField {
        &self.snapshots[i]
    }

    pub fn first(&self) -> &SpectralField {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &SpectralField {
        self.snapshots.last().expect("non-empty")
    }

    pub fn into_snapshots(self) -> Vec<SpectralField> {
        self.snapshots
    }

    /// Index of the snapshot at time `t`, if `t` falls on the mesh.
    pub fn index_of_time(&self, t: f64) -> Option<usize> {
        let pos = (t - self.t0) / self.dt;
        let idx = pos.round();
        if idx < 0.0 || (pos - idx).abs() > TIME_MATCH_TOL * pos.abs().max(1.0) {
            return None;
        }
        let idx = idx as usize;
        (idx < self.len()).then_some(idx)
    }

    /// Snapshot index range covering `[tau, tau + duration]`.
    pub fn window(&self, tau: f64, duration: f64) -> Result<std::ops::RangeInclusive<usize>> {
        let out_of_span = || Error::WindowOutOfSpan {
            start: tau,
            end: tau + duration,
            span_start: self.t0,
            span_end: self.t_end(),
        };
        if duration < 0.0 {
            return Err(out_of_span());
        }
        let a = self.index_of_time(tau).ok_or_else(out_of_span)?;
        let b = self.index_of_time(tau + duration).ok_or_else(out_of_span)?;
        Ok(a..=b)
    }

    /// Sub-trajectory on `[tau, tau + duration]`.
    pub fn slice(&self, tau: f64, duration: f64) -> Result<Self> {
        let range = self.window(tau, duration)?;
        let start = *range.start();
        Ok(Self {
            t0: self.time(start),
            dt: self.dt,
            snapshots: self.snapshots[range].to_vec(),
        })
    }

    pub fn map(&self, f: impl Fn(&SpectralField) -> SpectralField) -> Self {
        Self {
            t0: self.t0,
            dt: self.dt,
            snapshots: self.snapshots.iter().map(f).collect(),
        }
    }

    pub fn norms(&self, f: impl Fn(&SpectralField) -> f64) -> Vec<f64> {
        self.snapshots.iter().map(f).collect()
    }

    pub fn check_mesh(&self, other: &Trajectory) -> Result<()> {
        let same = self.len() == other.len()
            && (self.dt - other.dt).abs() <= TIME_MATCH_TOL * self.dt
            && (self.t0 - other.t0).abs() <= TIME_MATCH_TOL * self.dt
            && self.grid().same_as(other.grid());
        if same {
            Ok(())
        } else {
            Err(Error::MeshMismatch(format!(
                "[{}, {}] x {} vs [{}, {}] x {}",
                self.t0,
                self.t_end(),
                self.len(),
                other.t0,
                other.t_end(),
                other.len()
            )))
        }
    }

    /// Pointwise difference `self - other` on a shared mesh.
    pub fn difference(&self, other: &Trajectory) -> Result<Self> {
        self.check_mesh(other)?;
        Ok(Self {
            t0: self.t0,
            dt: self.dt,
            snapshots: self
                .snapshots
                .iter()
                .zip(&other.snapshots)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn sum(&self, other: &Trajectory) -> Result<Self> {
        self.check_mesh(other)?;
        Ok(Self {
            t0: self.t0,
            dt: self.dt,
            snapshots: self
                .snapshots
                .iter()
                .zip(&other.snapshots)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// `||u||_{Y^ell_{tau,T}}`: sup of `||u(s)||_{H^ell}` plus the square
    /// root of its trapezoidal time integral.
    pub fn y_norm(&self, ell: f64, tau: f64, duration: f64) -> Result<f64> {
        self.y_norm_with(tau, duration, |f| f.sobolev_norm(ell))
    }

    /// Y-type norm for an arbitrary per-snapshot norm.
    pub fn y_norm_with(&self, tau: f64, duration: f64, norm: impl Fn(&SpectralField) -> f64) -> Result<f64> {
        let range = self.window(tau, duration)?;
        let values: Vec<f64> = self.snapshots[range].iter().map(norm).collect();
        Ok(y_norm_from_series(&values, self.dt))
    }
}

/// `sup_i a_i + sqrt(trapezoid(a_i^2))` for equally spaced samples.
pub fn y_norm_from_series(norms: &[f64], dt: f64) -> f64 {
    let sup = norms.iter().copied().fold(0.0, f64::max);
    if norms.len() < 2 {
        return sup;
    }
    let squares: Vec<f64> = norms.iter().map(|a| a * a).collect();
    sup + trapezoid(&squares, dt).sqrt()
}

pub(crate) fn trapezoid(values: &[f64], dt: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => dt * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1])),
    }
}
