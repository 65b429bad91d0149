use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Result};

/// Periodic collocation grid on `[-L, L)` with `M` nodes.
///
/// Coefficients are stored in FFT order: storage index `i` holds wavenumber
/// `k = i` for `i < M/2` and `k = i - M` otherwise, so index `M/2` is the
/// Nyquist mode `k = -M/2`. Cloning is cheap; FFT plans are shared.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

struct GridInner {
    m: usize,
    half_length: f64,
    xi: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Grid {
    pub fn new(m: usize, half_length: f64) -> Result<Self> {
        if m < 8 || !m.is_multiple_of(2) {
            return Err(invalid("M", format!("must be even and >= 8, got {m}")));
        }
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(invalid("L", format!("must be positive, got {half_length}")));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(m);
        let inverse = planner.plan_fft_inverse(m);
        let xi = (0..m)
            .map(|i| std::f64::consts::PI * wavenumber(i, m) as f64 / half_length)
            .collect();
        Ok(Self {
            inner: Arc::new(GridInner {
                m,
                half_length,
                xi,
                forward,
                inverse,
            }),
        })
    }

    /// Grid on `[-pi, pi)`, where wavenumbers and frequencies coincide.
    pub fn torus(m: usize) -> Result<Self> {
        Self::new(m, std::f64::consts::PI)
    }

    pub fn len(&self) -> usize {
        self.inner.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn half_length(&self) -> f64 {
        self.inner.half_length
    }

    pub fn length(&self) -> f64 {
        2.0 * self.inner.half_length
    }

    pub fn dx(&self) -> f64 {
        self.length() / self.inner.m as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.inner.half_length + self.dx() * j as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.inner.m).map(|j| self.node(j)).collect()
    }

    /// Frequencies in storage order.
    pub fn xi(&self) -> &[f64] {
        &self.inner.xi
    }

    /// Wavenumber held at storage index `i`.
    pub fn k(&self, i: usize) -> i64 {
        wavenumber(i, self.inner.m)
    }

    /// Storage index of wavenumber `k`, if representable.
    pub fn index_of(&self, k: i64) -> Option<usize> {
        let half = (self.inner.m / 2) as i64;
        if k < -half || k >= half {
            return None;
        }
        Some(if k >= 0 { k as usize } else { (k + 2 * half) as usize })
    }

    pub fn nyquist_index(&self) -> usize {
        self.inner.m / 2
    }

    /// Largest resolved |xi|, attained by the Nyquist mode.
    pub fn max_xi(&self) -> f64 {
        std::f64::consts::PI * (self.inner.m / 2) as f64 / self.inner.half_length
    }

    /// Largest |k| kept by the 2/3 rule. Products of two fields in this
    /// band alias only onto discarded modes.
    pub fn dealias_cutoff(&self) -> usize {
        (self.inner.m - 1) / 3
    }

    pub(crate) fn fft_forward(&self, buf: &mut [Complex64]) {
        self.inner.forward.process(buf);
    }

    pub(crate) fn fft_inverse(&self, buf: &mut [Complex64]) {
        self.inner.inverse.process(buf);
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.m == other.inner.m
                && self.inner.half_length.to_bits() == other.inner.half_length.to_bits())
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("m", &self.inner.m)
            .field("half_length", &self.inner.half_length)
            .finish()
    }
}

fn wavenumber(i: usize, m: usize) -> i64 {
    if i < m / 2 {
        i as i64
    } else {
        i as i64 - m as i64
    }
}
