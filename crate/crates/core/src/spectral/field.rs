use std::ops::{Add, Mul, Neg, Sub};

use rustfft::num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Error, Result};

/// Imaginary residue tolerated when converting back to real nodal values,
/// relative to `max(1, max |g_j|)`.
pub const REAL_RESIDUE_TOL: f64 = 1e-12;

/// A function on a [`Grid`] stored by its normalized Fourier coefficients
/// `c_k = (1/M) sum_j g(x_j) exp(-i xi_k x_j)`, in the grid's storage order.
///
/// With this normalization `||g||^2_{L^2} = 2L sum_k |c_k|^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Wraps coefficients given in storage order.
    pub fn from_coeffs(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "{} coefficients for a grid of {} nodes",
                coeffs.len(),
                grid.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            coeffs,
        })
    }

    /// Forward transform of real nodal values.
    pub fn to_spectral(values: &[f64], grid: &Grid) -> Result<Self> {
        let m = grid.len();
        if values.len() != m {
            return Err(Error::Dimension(format!(
                "{} nodal values for a grid of {m} nodes",
                values.len()
            )));
        }
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Ok(Self::forward_from_buffer(grid, &mut buf))
    }

    /// Samples `g` on the grid nodes and transforms.
    pub fn from_fn(grid: &Grid, g: impl Fn(f64) -> f64) -> Self {
        let values: Vec<f64> = grid.nodes().into_iter().map(g).collect();
        Self::to_spectral(&values, grid).expect("node count matches grid")
    }

    /// Real nodal values. Fails if the field is not (numerically) real.
    pub fn from_spectral(&self) -> Result<Vec<f64>> {
        let buf = self.nodal_complex();
        let scale = buf.iter().fold(1.0_f64, |acc, z| acc.max(z.re.abs()));
        let residue = buf.iter().fold(0.0_f64, |acc, z| acc.max(z.im.abs()));
        let tolerance = REAL_RESIDUE_TOL * scale;
        if residue > tolerance {
            return Err(Error::Symmetry { residue, tolerance });
        }
        Ok(buf.into_iter().map(|z| z.re).collect())
    }

    /// Nodal values without the realness check.
    pub fn nodal_complex(&self) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| if i % 2 == 0 { c } else { -c })
            .collect();
        self.grid.fft_inverse(&mut buf);
        buf
    }

    fn forward_from_buffer(grid: &Grid, buf: &mut [Complex64]) -> Self {
        grid.fft_forward(buf);
        let inv_m = 1.0 / grid.len() as f64;
        // x_0 = -L contributes the phase (-1)^k.
        let coeffs = buf
            .iter()
            .enumerate()
            .map(|(i, &c)| if i % 2 == 0 { c * inv_m } else { -c * inv_m })
            .collect();
        Self {
            grid: grid.clone(),
            coeffs,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of wavenumber `k`; zero when `k` is not representable.
    pub fn coeff(&self, k: i64) -> Complex64 {
        self.grid
            .index_of(k)
            .map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    pub fn set_coeff(&mut self, k: i64, value: Complex64) {
        if let Some(i) = self.grid.index_of(k) {
            self.coeffs[i] = value;
        }
    }

    pub(crate) fn check_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "grid mismatch: {:?} vs {:?}",
                self.grid, other.grid
            )))
        }
    }

    /// Largest violation of `c_{-k} = conj(c_k)` (including a real DC and
    /// Nyquist coefficient).
    pub fn hermitian_defect(&self) -> f64 {
        let m = self.grid.len();
        let mut worst = self.coeffs[0].im.abs();
        worst = worst.max(self.coeffs[m / 2].im.abs());
        for i in 1..m / 2 {
            worst = worst.max((self.coeffs[i] - self.coeffs[m - i].conj()).norm());
        }
        worst
    }

    /// Projects onto real fields.
    pub fn enforce_hermitian(&mut self) {
        let m = self.grid.len();
        self.coeffs[0].im = 0.0;
        self.coeffs[m / 2].im = 0.0;
        for i in 1..m / 2 {
            let avg = (self.coeffs[i] + self.coeffs[m - i].conj()) * 0.5;
            self.coeffs[i] = avg;
            self.coeffs[m - i] = avg.conj();
        }
    }

    /// Multiplies each coefficient by `symbol(xi_k)`.
    ///
    /// The Nyquist mode stands for `cos(xi_N x)`, which has no sine partner on
    /// the grid, so it is scaled by the average of the symbol at `+xi_N` and
    /// `-xi_N`. For symbols with `symbol(-xi) = conj(symbol(xi))` this is the
    /// real part and realness of the field is preserved.
    pub fn apply_multiplier(&self, symbol: impl Fn(f64) -> Complex64) -> Self {
        let mut out = self.clone();
        out.apply_multiplier_in_place(symbol);
        out
    }

    pub fn apply_multiplier_in_place(&mut self, symbol: impl Fn(f64) -> Complex64) {
        let nyq = self.grid.nyquist_index();
        let xi = self.grid.xi();
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            let factor = if i == nyq {
                (symbol(xi[i]) + symbol(-xi[i])) * 0.5
            } else {
                symbol(xi[i])
            };
            *c *= factor;
        }
    }

    /// Real-symbol variant of [`apply_multiplier`](Self::apply_multiplier).
    pub fn apply_real_multiplier(&self, symbol: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        for (c, &xi) in out.coeffs.iter_mut().zip(self.grid.xi()) {
            *c *= symbol(xi);
        }
        out
    }

    /// `d/dx`.
    pub fn derivative(&self) -> Self {
        self.apply_multiplier(|xi| Complex64::new(0.0, xi))
    }

    /// `(I - d^2/dx^2)^{-1}`.
    pub fn helmholtz_inverse(&self) -> Self {
        self.apply_real_multiplier(|xi| 1.0 / (1.0 + xi * xi))
    }

    /// Discrete `H^ell` norm, `sqrt(2L sum_k (1 + xi_k^2)^ell |c_k|^2)`.
    pub fn sobolev_norm(&self, ell: f64) -> f64 {
        self.sobolev_norm_sq(ell).sqrt()
    }

    pub fn sobolev_norm_sq(&self, ell: f64) -> f64 {
        let sum: f64 = self
            .coeffs
            .iter()
            .zip(self.grid.xi())
            .map(|(c, &xi)| weight(xi, ell) * c.norm_sqr())
            .sum();
        self.grid.length() * sum
    }

    pub fn l2_norm(&self) -> f64 {
        self.sobolev_norm(0.0)
    }

    /// `L^2` inner product `int g h dx` for real fields, via the spectral sum.
    pub fn inner(&self, other: &SpectralField) -> Result<f64> {
        self.check_grid(other)?;
        let sum: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a.conj() * b).re)
            .sum();
        Ok(self.grid.length() * sum)
    }

    /// `L^2` inner product by physical-space quadrature `(2L/M) sum_j g h`.
    pub fn inner_quadrature(&self, other: &SpectralField) -> Result<f64> {
        self.check_grid(other)?;
        let a = self.nodal_complex();
        let b = other.nodal_complex();
        let sum: f64 = a.iter().zip(&b).map(|(x, y)| (x.conj() * y).re).sum();
        Ok(self.grid.dx() * sum)
    }

    /// Zeroes every mode with `|k|` above the 2/3-rule cutoff.
    pub fn dealiased(&self) -> Self {
        let mut out = self.clone();
        out.truncate_in_place(self.grid.dealias_cutoff());
        out
    }

    pub(crate) fn truncate_in_place(&mut self, kmax: usize) {
        let m = self.grid.len();
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            let k = if i < m / 2 { i } else { m - i };
            if k > kmax {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Pseudospectral product `u v` with 2/3-rule dealiasing applied to both
    /// factors and to the result.
    pub fn nonlinear_product(u: &SpectralField, v: &SpectralField) -> Result<Self> {
        Self::product(u, v, true)
    }

    /// Pseudospectral product, optionally dealiased.
    pub fn product(u: &SpectralField, v: &SpectralField, dealias: bool) -> Result<Self> {
        u.check_grid(v)?;
        let (a, b) = if dealias {
            (u.dealiased(), v.dealiased())
        } else {
            (u.clone(), v.clone())
        };
        let pa = a.nodal_complex();
        let pb = b.nodal_complex();
        let mut buf: Vec<Complex64> = pa.iter().zip(&pb).map(|(x, y)| x * y).collect();
        let mut out = Self::forward_from_buffer(&u.grid, &mut buf);
        if dealias {
            out.truncate_in_place(u.grid.dealias_cutoff());
        }
        Ok(out)
    }

    pub fn square(&self, dealias: bool) -> Self {
        Self::product(self, self, dealias).expect("same grid")
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.scale_in_place(factor);
        out
    }

    pub fn scale_in_place(&mut self, factor: f64) {
        for c in &mut self.coeffs {
            *c *= factor;
        }
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &SpectralField) -> Result<()> {
        self.check_grid(other)?;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * alpha;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest coefficient modulus difference.
    pub fn max_abs_diff(&self, other: &SpectralField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Sobolev weight `(1 + xi^2)^ell`.
#[inline]
pub fn weight(xi: f64, ell: f64) -> f64 {
    if ell == 0.0 {
        1.0
    } else if ell == 1.0 {
        1.0 + xi * xi
    } else {
        (1.0 + xi * xi).powf(ell)
    }
}

fn zip_with(a: &SpectralField, b: &SpectralField, f: impl Fn(Complex64, Complex64) -> Complex64) -> SpectralField {
    assert!(a.grid.same_as(&b.grid), "arithmetic on fields from different grids");
    SpectralField {
        grid: a.grid.clone(),
        coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(&x, &y)| f(x, y)).collect(),
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: Self) -> SpectralField {
        zip_with(self, rhs, |x, y| x + y)
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: Self) -> SpectralField {
        zip_with(self, rhs, |x, y| x - y)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scaled(-1.0)
    }
}

impl Mul<&SpectralField> for f64 {
    type Output = SpectralField;
    fn mul(self, rhs: &SpectralField) -> SpectralField {
        rhs.scaled(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_is_dc_mode() {
        let g = Grid::new(16, 3.0).unwrap();
        let f = SpectralField::to_spectral(&[1.0; 16], &g).unwrap();
        assert!((f.coeff(0) - c(1.0, 0.0)).norm() < 1e-15);
        for k in 1..8 {
            assert!(f.coeff(k).norm() < 1e-15);
            assert!(f.coeff(-k).norm() < 1e-15);
        }
    }

    #[test]
    fn sine_single_mode() {
        let g = Grid::torus(64).unwrap();
        let f = SpectralField::from_fn(&g, f64::sin);
        assert!((f.coeff(1) - c(0.0, -0.5)).norm() < 1e-14);
        assert!((f.coeff(-1) - c(0.0, 0.5)).norm() < 1e-14);
        for i in 0..64 {
            let k = g.k(i);
            if k.abs() != 1 {
                assert!(f.coeffs()[i].norm() < 1e-14, "k = {k}");
            }
        }
    }

    #[test]
    fn length_mismatch_is_dimension_error() {
        let g = Grid::new(16, 1.0).unwrap();
        assert!(matches!(
            SpectralField::to_spectral(&[0.0; 15], &g),
            Err(Error::Dimension(_))
        ));
        assert!(SpectralField::from_coeffs(&g, vec![c(0.0, 0.0); 8]).is_err());
    }

    #[test]
    fn inverse_of_known_coefficients() {
        let g = Grid::new(32, 2.0).unwrap();
        let mut f = SpectralField::zeros(&g);
        f.set_coeff(0, c(3.0, 0.0));
        let vals = f.from_spectral().unwrap();
        assert!(vals.iter().all(|v| (v - 3.0).abs() < 1e-14));

        let mut f = SpectralField::zeros(&g);
        f.set_coeff(1, c(0.5, 0.0));
        f.set_coeff(-1, c(0.5, 0.0));
        let vals = f.from_spectral().unwrap();
        for (j, v) in vals.iter().enumerate() {
            let x = g.node(j);
            assert!((v - (PI * x / 2.0).cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn broken_symmetry_is_rejected() {
        let g = Grid::new(16, 1.0).unwrap();
        let mut f = SpectralField::zeros(&g);
        f.set_coeff(2, c(1.0, 0.0));
        assert!(matches!(f.from_spectral(), Err(Error::Symmetry { .. })));
        f.enforce_hermitian();
        assert!(f.from_spectral().is_ok());
        assert!(f.hermitian_defect() < 1e-15);
    }

    #[test]
    fn random_round_trip() {
        let g = Grid::new(128, 5.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let vals: Vec<f64> = (0..128).map(|_| rng.random_range(-1.0..1.0)).collect();
        let back = SpectralField::to_spectral(&vals, &g)
            .unwrap()
            .from_spectral()
            .unwrap();
        let err = vals.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn multiplier_examples() {
        let g = Grid::torus(32).unwrap();
        let s = SpectralField::from_fn(&g, f64::sin);
        let id = s.apply_multiplier(|_| c(1.0, 0.0));
        assert!(id.max_abs_diff(&s) < 1e-16);

        let d = s.derivative();
        let cos = SpectralField::from_fn(&g, f64::cos);
        assert!(d.max_abs_diff(&cos) < 1e-14);

        let h = s.helmholtz_inverse();
        assert!(h.max_abs_diff(&s.scaled(0.5)) < 1e-15);
    }

    #[test]
    fn odd_symbol_keeps_nyquist_real() {
        let g = Grid::new(16, 1.0).unwrap();
        let vals: Vec<f64> = (0..16).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let f = SpectralField::to_spectral(&vals, &g).unwrap();
        assert!(f.coeff(-8).norm() > 0.5);
        let d = f.derivative();
        assert!(d.from_spectral().is_ok());
        assert!(d.hermitian_defect() < 1e-15);
    }

    #[test]
    fn sobolev_norm_single_mode() {
        let g = Grid::torus(64).unwrap();
        let s = SpectralField::from_fn(&g, f64::sin);
        assert!((s.sobolev_norm(0.0) - PI.sqrt()).abs() < 1e-13);
        let expected = (2f64.sqrt() * PI).sqrt();
        assert!((s.sobolev_norm(0.5) - expected).abs() < 1e-13);
        assert!((expected - 2.107815).abs() < 1e-6);
    }

    #[test]
    fn trilinear_inner_two_ways() {
        let g = Grid::new(64, 4.0).unwrap();
        let a = SpectralField::from_fn(&g, |x| (-(x * x)).exp() * (3.0 * x).cos());
        let b = SpectralField::from_fn(&g, |x| (x / 2.0).sin() + 0.3);
        let s = a.inner(&b).unwrap();
        let q = a.inner_quadrature(&b).unwrap();
        assert!((s - q).abs() < 1e-12 * s.abs().max(1.0));
    }

    #[test]
    fn product_of_cosines() {
        let g = Grid::torus(32).unwrap();
        let u = SpectralField::from_fn(&g, f64::cos);
        let p = SpectralField::nonlinear_product(&u, &u).unwrap();
        let expected = SpectralField::from_fn(&g, |x| 0.5 * (1.0 + (2.0 * x).cos()));
        assert!(p.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn product_with_one_is_identity_in_band() {
        let g = Grid::new(48, 2.0).unwrap();
        let one = SpectralField::from_fn(&g, |_| 1.0);
        let u = SpectralField::from_fn(&g, |x| (-(x * x) * 4.0).exp()).dealiased();
        let p = SpectralField::nonlinear_product(&u, &one).unwrap();
        assert!(p.max_abs_diff(&u) < 1e-15);
    }

    #[test]
    fn product_grid_mismatch() {
        let a = SpectralField::zeros(&Grid::new(16, 1.0).unwrap());
        let b = SpectralField::zeros(&Grid::new(16, 2.0).unwrap());
        assert!(matches!(
            SpectralField::nonlinear_product(&a, &b),
            Err(Error::Dimension(_))
        ));
    }
}
