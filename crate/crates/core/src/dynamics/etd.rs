//! Exponential time differencing for `c' = lambda c + N(c, t)` with a
//! diagonal linear part.

use rustfft::num_complex::Complex64;

use crate::error::Result;
use crate::spectral::SpectralField;

/// Time integrator. All three are exact on the linear part.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Integrator {
    /// First-order exponential Euler.
    ExpEuler,
    /// Second-order Cox-Matthews ETD2RK.
    ExpRk2,
    /// Fourth-order Cox-Matthews ETDRK4.
    Etdrk4,
}

impl Integrator {
    pub fn order(&self) -> u32 {
        match self {
            Self::ExpEuler => 1,
            Self::ExpRk2 => 2,
            Self::Etdrk4 => 4,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::ExpEuler => "exp_euler",
            Self::ExpRk2 => "exp_rk2",
            Self::Etdrk4 => "etdrk4",
        }
    }
}

/// `phi_j(z) = sum_{n >= 0} z^n / (n + j)!`, with `phi_0 = exp`.
pub fn phi(j: u32, z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        let mut term = Complex64::new(1.0, 0.0);
        for i in 1..=j {
            term /= i as f64;
        }
        let mut sum = term;
        for n in 1..30 {
            term *= z / (n + j) as f64;
            sum += term;
            if term.norm() < 1e-18 * sum.norm() {
                break;
            }
        }
        return sum;
    }
    let ez = z.exp();
    match j {
        0 => ez,
        1 => (ez - 1.0) / z,
        2 => (ez - 1.0 - z) / (z * z),
        3 => (ez - 1.0 - z - z * z * 0.5) / (z * z * z),
        _ => {
            // phi_j(z) = (phi_{j-1}(z) - 1/(j-1)!) / z
            let mut fact = 1.0;
            for i in 1..j {
                fact *= i as f64;
            }
            (phi(j - 1, z) - 1.0 / fact) / z
        }
    }
}

/// Precomputed per-mode coefficients for one step size.
pub(crate) struct EtdStepper {
    integrator: Integrator,
    h: f64,
    e: Vec<Complex64>,
    e_half: Vec<Complex64>,
    p1: Vec<Complex64>,
    p2: Vec<Complex64>,
    p1_half: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
}

impl EtdStepper {
    pub(crate) fn new(integrator: Integrator, h: f64, lambda: &[Complex64]) -> Self {
        let map = |f: &dyn Fn(Complex64) -> Complex64| -> Vec<Complex64> {
            lambda.iter().map(|&l| f(l * h)).collect()
        };
        let e = map(&|z| z.exp());
        let e_half = map(&|z| (z * 0.5).exp());
        let p1 = map(&|z| phi(1, z) * h);
        let p2 = map(&|z| phi(2, z) * h);
        let p1_half = map(&|z| phi(1, z * 0.5) * (h * 0.5));
        let (f1, f2, f3) = if integrator == Integrator::Etdrk4 {
            (
                map(&|z| (phi(1, z) - phi(2, z) * 3.0 + phi(3, z) * 4.0) * h),
                map(&|z| (phi(2, z) - phi(3, z) * 2.0) * h),
                map(&|z| (-phi(2, z) + phi(3, z) * 4.0) * h),
            )
        } else {
            (Vec::new(), Vec::new(), Vec::new())
        };
        Self {
            integrator,
            h,
            e,
            e_half,
            p1,
            p2,
            p1_half,
            f1,
            f2,
            f3,
        }
    }

    /// Advances `u` from `t` to `t + h`.
    pub(crate) fn step<F>(&self, u: &SpectralField, t: f64, nonlinear: &mut F) -> Result<SpectralField>
    where
        F: FnMut(&SpectralField, f64) -> Result<SpectralField>,
    {
        let h = self.h;
        let grid = u.grid();
        let uc = u.coeffs();
        let build = |coeffs: Vec<Complex64>| SpectralField::from_coeffs(grid, coeffs);
        match self.integrator {
            Integrator::ExpEuler => {
                let nu = nonlinear(u, t)?;
                let out = combine(uc.len(), |i| self.e[i] * uc[i] + self.p1[i] * nu.coeffs()[i]);
                build(out)
            }
            Integrator::ExpRk2 => {
                let nu = nonlinear(u, t)?;
                let a = build(combine(uc.len(), |i| self.e[i] * uc[i] + self.p1[i] * nu.coeffs()[i]))?;
                let na = nonlinear(&a, t + h)?;
                let ac = a.coeffs();
                let out = combine(uc.len(), |i| {
                    ac[i] + self.p2[i] * (na.coeffs()[i] - nu.coeffs()[i])
                });
                build(out)
            }
            Integrator::Etdrk4 => {
                let th = t + 0.5 * h;
                let nu = nonlinear(u, t)?;
                let nuc = nu.coeffs();
                let a = build(combine(uc.len(), |i| self.e_half[i] * uc[i] + self.p1_half[i] * nuc[i]))?;
                let na = nonlinear(&a, th)?;
                let b = build(combine(uc.len(), |i| {
                    self.e_half[i] * uc[i] + self.p1_half[i] * na.coeffs()[i]
                }))?;
                let nb = nonlinear(&b, th)?;
                let c = build(combine(uc.len(), |i| {
                    self.e_half[i] * a.coeffs()[i]
                        + self.p1_half[i] * (nb.coeffs()[i] * 2.0 - nuc[i])
                }))?;
                let nc = nonlinear(&c, t + h)?;
                let out = combine(uc.len(), |i| {
                    self.e[i] * uc[i]
                        + self.f1[i] * nuc[i]
                        + self.f2[i] * (na.coeffs()[i] + nb.coeffs()[i]) * 2.0
                        + self.f3[i] * nc.coeffs()[i]
                });
                build(out)
            }
        }
    }
}

fn combine(n: usize, f: impl Fn(usize) -> Complex64) -> Vec<Complex64> {
    (0..n).map(f).collect()
}
