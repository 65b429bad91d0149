//! Seeded random test fields with prescribed spectral envelopes.
//!
//! Sample `i` of a call draws from its own ChaCha8 stream (`seed`, stream
//! `i`), so any subset of samples can be regenerated independently and
//! parallel generation is order-free.

use std::f64::consts::PI;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;

use crate::dynamics::Trajectory;
use crate::error::{invalid, Result};
use crate::spectral::{Grid, SpectralField};

/// Envelope of `|c_k|` as a function of `xi = |xi_k|`. Modes outside the
/// envelope's support (and always the Nyquist mode) are zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpectrumProfile {
    /// Complex Gaussian coefficients of unit variance on `min_xi <= xi <= max_xi`.
    WhiteBand { min_xi: f64, max_xi: f64 },
    /// `|c_k| = xi^{-alpha} U` with `U ~ Uniform[0.5, 1.5]` and a uniform
    /// phase, on `0 < xi <= max_xi`.
    PowerLaw { alpha: f64, max_xi: f64 },
    /// Complex Gaussian coefficients times `exp(-(xi - center)^2 / (2 width^2))`,
    /// restricted to `|xi - center| <= 3 width`.
    LocalizedBump { center_xi: f64, width_xi: f64 },
}

impl SpectrumProfile {
    pub fn name(&self) -> &'static str {
        match self {
            Self::WhiteBand { .. } => "white_band",
            Self::PowerLaw { .. } => "power_law",
            Self::LocalizedBump { .. } => "localized_bump",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::WhiteBand { min_xi, max_xi } => min_xi >= 0.0 && max_xi >= min_xi,
            Self::PowerLaw { alpha, max_xi } => alpha.is_finite() && max_xi > 0.0,
            Self::LocalizedBump { center_xi, width_xi } => center_xi >= 0.0 && width_xi > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(invalid("spectrum_profile", format!("bad parameters {self:?}")))
        }
    }

    fn draw(&self, xi: f64, rng: &mut ChaCha8Rng) -> Complex64 {
        let gauss = |rng: &mut ChaCha8Rng| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        };
        match *self {
            Self::WhiteBand { min_xi, max_xi } => {
                let c = gauss(rng);
                if xi >= min_xi && xi <= max_xi {
                    c
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Self::PowerLaw { alpha, max_xi } => {
                let amp = rng.random_range(0.5..1.5);
                let phase = rng.random_range(0.0..2.0 * PI);
                if xi > 0.0 && xi <= max_xi {
                    Complex64::from_polar(amp * xi.powf(-alpha), phase)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
            Self::LocalizedBump { center_xi, width_xi } => {
                let c = gauss(rng);
                let d = (xi - center_xi) / width_xi;
                if d.abs() <= 3.0 {
                    c * (-0.5 * d * d).exp()
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
        }
    }
}

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seed for an independent purpose derived from a master seed. Uses streams
/// in the upper half, which per-sample streams never reach.
pub fn split_seed(seed: u64, purpose: u64) -> u64 {
    stream_rng(seed, (1 << 63) | purpose).next_u64()
}

/// One real field drawn from `rng`; every nonnegative mode consumes the same
/// number of draws whatever the envelope, so profiles share randomness layout.
pub fn sample_field(grid: &Grid, profile: &SpectrumProfile, rng: &mut ChaCha8Rng) -> SpectralField {
    let m = grid.len();
    let mut field = SpectralField::zeros(grid);
    let dc = profile.draw(0.0, rng);
    field.set_coeff(0, Complex64::new(dc.re, 0.0));
    for k in 1..(m / 2) as i64 {
        let xi = grid.xi()[k as usize];
        let c = profile.draw(xi, rng);
        field.set_coeff(k, c);
        field.set_coeff(-k, c.conj());
    }
    field
}

/// `count` seeded real fields; sample `i` uses stream `i`.
pub fn sample_fields(seed: u64, count: usize, grid: &Grid, profile: &SpectrumProfile) -> Result<Vec<SpectralField>> {
    profile.validate()?;
    Ok(crate::par::map_range(count, |i| {
        sample_field(grid, profile, &mut stream_rng(seed, i as u64))
    }))
}

/// `count` seeded fields cycling through `profiles`: sample `i` draws from
/// `profiles[i % profiles.len()]` on stream `i`.
pub fn sample_mixture(
    seed: u64,
    count: usize,
    grid: &Grid,
    profiles: &[SpectrumProfile],
) -> Result<Vec<SpectralField>> {
    if profiles.is_empty() {
        return Err(invalid("profiles", "need at least one spectrum profile"));
    }
    for p in profiles {
        p.validate()?;
    }
    Ok(crate::par::map_range(count, |i| {
        sample_field(grid, &profiles[i % profiles.len()], &mut stream_rng(seed, i as u64))
    }))
}

/// Broadband power-law samples interleaved with localized bumps centred on
/// `0` and on `2^{j/2}`, `j = 0, 1, ...`, up to `max_xi`. The bumps place
/// energy at every scale, so for any `N` some samples sit near the
/// frequencies where the norm-equivalence ratios are extreme.
pub fn multiscale_profiles(alpha: f64, max_xi: f64) -> Vec<SpectrumProfile> {
    let mut profiles = vec![
        SpectrumProfile::PowerLaw { alpha, max_xi },
        SpectrumProfile::LocalizedBump {
            center_xi: 0.0,
            width_xi: 0.5,
        },
    ];
    let mut j = 0;
    loop {
        let center_xi = 2f64.powf(j as f64 / 2.0);
        if center_xi > max_xi {
            break;
        }
        profiles.push(SpectrumProfile::PowerLaw { alpha, max_xi });
        profiles.push(SpectrumProfile::LocalizedBump {
            center_xi,
            width_xi: (center_xi / 8.0).max(0.5),
        });
        j += 1;
    }
    profiles
}

/// Random smooth-in-time trajectories `g0 + g1 cos(omega t + phase)` with
/// `g0, g1` from `profile`, `omega ~ Uniform[0.5, 2]`, sampled on
/// `t = 0, dt, ..., duration`.
pub fn sample_trajectories(
    seed: u64,
    count: usize,
    grid: &Grid,
    profile: &SpectrumProfile,
    dt: f64,
    duration: f64,
) -> Result<Vec<Trajectory>> {
    profile.validate()?;
    let steps = crate::dynamics::step_count(duration, dt)?;
    crate::par::try_map_range(count, |i| {
        let mut rng = stream_rng(seed, i as u64);
        let g0 = sample_field(grid, profile, &mut rng);
        let g1 = sample_field(grid, profile, &mut rng);
        let omega = rng.random_range(0.5..2.0);
        let phase = rng.random_range(0.0..2.0 * PI);
        let snapshots = (0..=steps)
            .map(|s| {
                let t = s as f64 * dt;
                let mut f = g0.clone();
                f.axpy((omega * t + phase).cos(), &g1).expect("same grid");
                f
            })
            .collect();
        Trajectory::new(0.0, dt, snapshots)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::fit_loglog;

    #[test]
    fn mixture_cycles_profiles() {
        let g = Grid::torus(64).unwrap();
        let profiles = [
            SpectrumProfile::WhiteBand { min_xi: 0.0, max_xi: 3.0 },
            SpectrumProfile::WhiteBand { min_xi: 10.0, max_xi: 12.0 },
        ];
        let fields = sample_mixture(3, 4, &g, &profiles).unwrap();
        for (i, f) in fields.iter().enumerate() {
            let top = f.coeffs().iter().zip(g.xi()).filter(|(c, _)| c.norm() > 0.0).map(|(_, x)| x.abs()).fold(0.0, f64::max);
            assert!(if i % 2 == 0 { top <= 3.0 } else { (10.0..=12.0).contains(&top) });
        }
        assert!(sample_mixture(3, 4, &g, &[]).is_err());
        let ms = multiscale_profiles(1.0, 256.0);
        assert_eq!(ms.len(), 2 + 2 * 17);
    }

    #[test]
    fn split_seeds_differ() {
        let a = split_seed(7, 1);
        assert_eq!(a, split_seed(7, 1));
        assert_ne!(a, split_seed(7, 2));
        assert_ne!(a, split_seed(8, 1));
    }

    #[test]
    fn empty_and_deterministic() {
        let g = Grid::new(64, 5.0).unwrap();
        let p = SpectrumProfile::WhiteBand { min_xi: 0.0, max_xi: 4.0 };
        assert!(sample_fields(1, 0, &g, &p).unwrap().is_empty());
        let a = sample_fields(7, 5, &g, &p).unwrap();
        let b = sample_fields(7, 5, &g, &p).unwrap();
        assert_eq!(a, b);
        let c = sample_fields(8, 5, &g, &p).unwrap();
        assert_ne!(a, c);
        // streams are independent of count
        let d = sample_fields(7, 3, &g, &p).unwrap();
        assert_eq!(&a[..3], &d[..]);
    }

    #[test]
    fn hermitian_and_band_limited() {
        let g = Grid::new(128, 10.0).unwrap();
        for p in [
            SpectrumProfile::WhiteBand { min_xi: 1.0, max_xi: 5.0 },
            SpectrumProfile::PowerLaw { alpha: 1.0, max_xi: 8.0 },
            SpectrumProfile::LocalizedBump { center_xi: 6.0, width_xi: 0.5 },
        ] {
            for f in sample_fields(3, 4, &g, &p).unwrap() {
                assert_eq!(f.hermitian_defect(), 0.0);
                assert!(f.from_spectral().is_ok());
                assert_eq!(f.coeffs()[g.nyquist_index()].norm(), 0.0);
            }
        }
        let f = &sample_fields(3, 1, &g, &SpectrumProfile::WhiteBand { min_xi: 1.0, max_xi: 5.0 }).unwrap()[0];
        for (c, xi) in f.coeffs().iter().zip(g.xi()) {
            if xi.abs() < 1.0 || xi.abs() > 5.0 {
                assert_eq!(c.norm(), 0.0);
            }
        }
    }

    #[test]
    fn power_law_envelope_slope() {
        let g = Grid::torus(512).unwrap();
        let max_xi = 160.0;
        let f = &sample_fields(11, 1, &g, &SpectrumProfile::PowerLaw { alpha: 1.0, max_xi }).unwrap()[0];
        let (k, c): (Vec<f64>, Vec<f64>) = (1..=160).map(|k| (k as f64, f.coeff(k).norm())).unzip();
        let fit = fit_loglog(&k, &c).unwrap();
        assert!((fit.slope + 1.0).abs() < 0.2, "slope {}", fit.slope);
    }
}
