//! `|(I_N (u v)_x, I_N w)| <= C N^{-3/2 + eps} ||I_N u||_{H^1} ||I_N v||_{H^1} ||I_N w||_{H^1}`.
//!
//! The estimate is a high-frequency statement. For fixed smooth `a, w` and
//! `N -> infinity`, `(I_N (a w)_x, I_N w) -> (1/2) int a_x w^2`, which is in
//! general nonzero, so no decaying bound holds uniformly over all inputs.
//! It is probed with triples whose spectra sit in the band
//! `N/2 <= |xi| <= 2N`, where a single triad gives
//!
//! ```text
//! R = xi_c m(xi_c) / (2 m(xi_a) m(xi_b) sqrt((1 + xi_a^2)(1 + xi_b^2)(1 + xi_c^2)) sqrt(L)),
//! ```
//!
//! a decay of order `N^{-2}`.

use super::report::{rows_slope, Check, EstimateReport, EstimateRow, Inequality};
use super::sampling::{sample_field, stream_rng, SpectrumProfile};
use crate::error::{invalid, Error, Result};
use crate::spectral::{i_h1_norm, i_multiplier, i_operator, Grid, ImethodParams, SpectralField};

#[derive(Clone, Debug, PartialEq)]
pub struct Triple {
    pub u: SpectralField,
    pub v: SpectralField,
    pub w: SpectralField,
}

/// `(I_N (u v)_x, I_N w)` as a spectral sum.
pub fn trilinear_form(u: &SpectralField, v: &SpectralField, w: &SpectralField, params: &ImethodParams) -> Result<f64> {
    let flux = i_operator(&SpectralField::nonlinear_product(u, v)?.derivative(), params);
    flux.inner(&i_operator(w, params))
}

/// [`trilinear_form`] by physical-space quadrature of the same integrand.
pub fn trilinear_form_quadrature(
    u: &SpectralField,
    v: &SpectralField,
    w: &SpectralField,
    params: &ImethodParams,
) -> Result<f64> {
    let flux = i_operator(&SpectralField::nonlinear_product(u, v)?.derivative(), params);
    flux.inner_quadrature(&i_operator(w, params))
}

/// `|(I_N (u v)_x, I_N w)| / prod ||I_N .||_{H^1}`; `0` when the form vanishes.
pub fn trilinear_ratio(triple: &Triple, params: &ImethodParams) -> Result<f64> {
    let form = trilinear_form(&triple.u, &triple.v, &triple.w, params)?;
    if form == 0.0 {
        return Ok(0.0);
    }
    let denom = i_h1_norm(&triple.u, params) * i_h1_norm(&triple.v, params) * i_h1_norm(&triple.w, params);
    Ok(form.abs() / denom)
}

/// Adversarial band `[N/2, 2N]`.
pub fn adversarial_band(n: f64) -> SpectrumProfile {
    SpectrumProfile::WhiteBand {
        min_xi: 0.5 * n,
        max_xi: 2.0 * n,
    }
}

/// `count` triples with `u, v, w` drawn independently from the adversarial
/// band at `N`; triple `i` uses stream `i` of `seed`.
pub fn adversarial_triples(seed: u64, count: usize, grid: &Grid, n: f64) -> Vec<Triple> {
    let profile = adversarial_band(n);
    crate::par::map_range(count, |i| {
        let mut rng = stream_rng(seed, i as u64);
        Triple {
            u: sample_field(grid, &profile, &mut rng),
            v: sample_field(grid, &profile, &mut rng),
            w: sample_field(grid, &profile, &mut rng),
        }
    })
}

/// Largest single-triad ratio with `u = cos(xi_a x)`, `v = cos(xi_b x)`
/// and `xi_a, xi_b` grid frequencies in `[lo, hi]`; `w` is the matching
/// sine at `xi_a + xi_b` or `|xi_a - xi_b|`.
pub fn trilinear_modewise_worst(grid: &Grid, params: &ImethodParams, lo: f64, hi: f64) -> f64 {
    let freqs: Vec<f64> = grid.xi()[1..grid.nyquist_index()]
        .iter()
        .copied()
        .filter(|&xi| xi >= lo && xi <= hi)
        .collect();
    let sqrt_l = grid.half_length().sqrt();
    let m = |xi: f64| i_multiplier(xi, params);
    let mut worst: f64 = 0.0;
    for (i, &a) in freqs.iter().enumerate() {
        for &b in &freqs[i..] {
            let base = 2.0 * m(a) * m(b) * ((1.0 + a * a) * (1.0 + b * b)).sqrt() * sqrt_l;
            for c in [a + b, (a - b).abs()] {
                if c > 0.0 {
                    worst = worst.max(c * m(c) / (base * (1.0 + c * c).sqrt()));
                }
            }
        }
    }
    worst
}

/// `C N^{exponent}` with `exponent = -3/2 + eps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrilinearConstant {
    pub constant: f64,
    pub exponent: f64,
}

impl TrilinearConstant {
    pub fn bound(&self, n: f64) -> f64 {
        self.constant * n.powf(self.exponent)
    }
}

fn check_resolution(grid: &Grid, n_grid: &[f64]) -> Result<()> {
    let max_n = n_grid.iter().copied().fold(0.0, f64::max);
    if grid.max_xi() < 4.0 * max_n {
        return Err(Error::Resolution {
            max_xi: grid.max_xi(),
            required: 4.0 * max_n,
        });
    }
    Ok(())
}

fn worst_ratio(triples: &[Triple], params: &ImethodParams) -> Result<f64> {
    let ratios = crate::par::try_map(triples, |t| trilinear_ratio(t, params))?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

/// `safety * max_N max(mode-wise worst, pilot worst) * N^{3/2 - eps}`.
///
/// `pilot[i]` are triples for `n_grid[i]`, drawn with a seed different from
/// the verified set.
pub fn calibrate_trilinear_constant(
    grid: &Grid,
    ell: f64,
    n_grid: &[f64],
    epsilon: f64,
    pilot: &[Vec<Triple>],
    safety: f64,
) -> Result<TrilinearConstant> {
    if pilot.len() != n_grid.len() {
        return Err(invalid("pilot", "one pilot set per N required"));
    }
    if !(safety >= 1.0) {
        return Err(invalid("safety", format!("must be at least 1, got {safety}")));
    }
    check_resolution(grid, n_grid)?;
    let exponent = -1.5 + epsilon;
    let mut constant: f64 = 0.0;
    for (&n, triples) in n_grid.iter().zip(pilot) {
        let params = ImethodParams::new(ell, n)?;
        let modewise = trilinear_modewise_worst(grid, &params, 0.5 * n, 2.0 * n);
        let sampled = worst_ratio(triples, &params)?;
        constant = constant.max(modewise.max(sampled) / n.powf(exponent));
    }
    Ok(TrilinearConstant {
        constant: safety * constant,
        exponent,
    })
}

/// Per-`N` worst ratio, its log-log slope, and violations of `constant`.
///
/// `triples[i]` are the samples for `n_grid[i]`. Passes when the slope is at
/// most `-3/2 + epsilon` and, if a constant is given, no sample exceeds it.
pub fn verify_trilinear(
    grid: &Grid,
    triples: &[Vec<Triple>],
    ell: f64,
    n_grid: &[f64],
    epsilon: f64,
    constant: Option<&TrilinearConstant>,
) -> Result<EstimateReport> {
    if n_grid.len() < 4 {
        return Err(invalid("n_grid", format!("need at least 4 values of N, got {}", n_grid.len())));
    }
    if triples.len() != n_grid.len() {
        return Err(invalid("triples", "one sample set per N required"));
    }
    check_resolution(grid, n_grid)?;
    let mut rows = Vec::with_capacity(n_grid.len());
    let mut violations = 0usize;
    let mut worst_excess: f64 = 0.0;
    let mut diagnostics = Vec::new();
    let mut samples = 0;
    for (&n, set) in n_grid.iter().zip(triples) {
        let params = ImethodParams::new(ell, n)?;
        let ratios = crate::par::try_map(set, |t| trilinear_ratio(t, &params))?;
        samples += ratios.len();
        if let Some(c) = constant {
            let bound = c.bound(n);
            violations += ratios.iter().filter(|&&r| r > bound).count();
            worst_excess = ratios.iter().map(|r| r / bound).fold(worst_excess, f64::max);
        }
        diagnostics.push((
            format!("mode-wise worst at N = {n}"),
            trilinear_modewise_worst(grid, &params, 0.5 * n, 2.0 * n),
        ));
        rows.push(EstimateRow {
            param: n,
            worst_ratio: ratios.into_iter().fold(0.0, f64::max),
            lower_ratio: None,
        });
    }
    let slope = rows_slope(&rows);
    let target = -1.5 + epsilon;
    let mut checks = vec![Check::at_most(
        "log-log slope",
        slope.map_or(f64::INFINITY, |f| f.slope),
        target,
    )];
    if let Some(c) = constant {
        checks.push(Check::at_most("samples above calibrated bound", violations as f64, 0.0));
        diagnostics.push(("calibrated constant".into(), c.constant));
        diagnostics.push(("max ratio / bound".into(), worst_excess));
    }
    if let Some(fit) = &slope {
        let (lo, hi) = fit.slope_interval();
        diagnostics.push(("slope 95% low".into(), lo));
        diagnostics.push(("slope 95% high".into(), hi));
    }
    Ok(EstimateReport {
        inequality: Inequality::Trilinear,
        ell,
        samples,
        worst_ratio: rows.iter().map(|r| r.worst_ratio).fold(0.0, f64::max),
        rows,
        slope,
        checks,
        diagnostics,
    })
}
