//! Empirical constants of `c ||g||_{H^ell} <= ||I_N g||_{H^1} <= C N^{1-ell} ||g||_{H^ell}`.

use super::report::{rows_slope, spread, Check, EstimateReport, EstimateRow, Inequality};
use crate::error::{invalid, Result};
use crate::spectral::{i_h1_norm, i_multiplier, weight, Grid, ImethodParams, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EquivalenceThresholds {
    /// Lower constants must be at least this.
    pub c_low: f64,
    /// Upper constants must be at most this.
    pub c_high: f64,
    /// Max/min of each constant across `N`.
    pub n_stability: f64,
}

impl Default for EquivalenceThresholds {
    fn default() -> Self {
        Self {
            c_low: 0.9,
            c_high: 3.0,
            n_stability: 2.0,
        }
    }
}

/// `(||I_N g||_{H^1} / ||g||_{H^ell}, ||I_N g||_{H^1} / (N^{1-ell} ||g||_{H^ell}))`.
pub fn equivalence_ratios(field: &SpectralField, ell: f64, n: f64) -> Result<(f64, f64)> {
    let params = ImethodParams::new(ell, n)?;
    let denom = field.sobolev_norm(ell);
    if denom == 0.0 {
        return Err(invalid("field", "zero field has no norm ratio"));
    }
    let lower = i_h1_norm(field, &params) / denom;
    Ok((lower, lower / n.powf(1.0 - ell)))
}

/// Extremes of the single-mode ratios over the grid's frequencies:
/// `(min lower, max upper)`.
pub fn equivalence_modewise(grid: &Grid, ell: f64, n: f64) -> Result<(f64, f64)> {
    let params = ImethodParams::new(ell, n)?;
    let scale = n.powf(1.0 - ell);
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for &xi in grid.xi() {
        let r = i_multiplier(xi, &params) * (weight(xi, 1.0) / weight(xi, ell)).sqrt();
        lo = lo.min(r);
        hi = hi.max(r / scale);
    }
    Ok((lo, hi))
}

/// Per-`N` lower and upper constants over `fields`.
pub fn verify_equivalence(
    fields: &[SpectralField],
    ell: f64,
    n_grid: &[f64],
    thresholds: &EquivalenceThresholds,
) -> Result<EstimateReport> {
    if !(0.0..=1.0).contains(&ell) {
        return Err(invalid("ell", format!("must lie in [0, 1], got {ell}")));
    }
    if n_grid.len() < 2 {
        return Err(invalid("n_grid", "need at least 2 values of N"));
    }
    if fields.is_empty() {
        return Err(invalid("fields", "need at least one sample"));
    }
    let rows = n_grid
        .iter()
        .map(|&n| {
            let ratios = crate::par::try_map(fields, |f| equivalence_ratios(f, ell, n))?;
            let lower = ratios.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
            let upper = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
            Ok(EstimateRow {
                param: n,
                worst_ratio: upper,
                lower_ratio: Some(lower),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let lowers = || rows.iter().map(|r| r.lower_ratio.expect("set above"));
    let uppers = || rows.iter().map(|r| r.worst_ratio);
    let min_lower = lowers().fold(f64::INFINITY, f64::min);
    let max_upper = uppers().fold(0.0, f64::max);
    let checks = vec![
        Check::at_least("lower constant", min_lower, thresholds.c_low),
        Check::at_most("upper constant", max_upper, thresholds.c_high),
        Check::at_most("lower N-spread", spread(lowers()), thresholds.n_stability),
        Check::at_most("upper N-spread", spread(uppers()), thresholds.n_stability),
    ];
    Ok(EstimateReport {
        inequality: Inequality::Equivalence,
        ell,
        samples: fields.len(),
        worst_ratio: max_upper,
        slope: rows_slope(&rows),
        rows,
        checks,
        diagnostics: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verification::{sample_fields, SpectrumProfile};
    use rustfft::num_complex::Complex64;

    #[test]
    fn band_limited_below_n_at_ell_one() {
        let g = Grid::torus(128).unwrap();
        let fields = sample_fields(5, 10, &g, &SpectrumProfile::WhiteBand { min_xi: 0.0, max_xi: 7.0 }).unwrap();
        let rep = verify_equivalence(&fields, 1.0, &[8.0, 16.0], &EquivalenceThresholds::default()).unwrap();
        for row in &rep.rows {
            assert!((row.worst_ratio - 1.0).abs() < 1e-12);
            assert!((row.lower_ratio.unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(rep.pass());
        assert!(rep.slope.is_none());
    }

    #[test]
    fn single_mode_at_two_n() {
        let g = Grid::torus(256).unwrap();
        for n in [4.0, 8.0, 16.0] {
            let mut f = SpectralField::zeros(&g);
            f.set_coeff(2 * n as i64, Complex64::new(0.5, 0.0));
            f.set_coeff(-2 * n as i64, Complex64::new(0.5, 0.0));
            let (lower, _) = equivalence_ratios(&f, 0.0, n).unwrap();
            let expected = 0.5 * (1.0 + 4.0 * n * n).sqrt();
            assert!((lower - expected).abs() < 1e-12 * expected);
            assert!(lower >= 1.0);
        }
    }

    #[test]
    fn modewise_bounds_clear_thresholds() {
        let g = Grid::torus(1024).unwrap();
        let t = EquivalenceThresholds::default();
        for ell in [0.0, 0.25, 0.5, 0.75] {
            for n in [8.0, 16.0, 32.0, 64.0] {
                let (lo, hi) = equivalence_modewise(&g, ell, n).unwrap();
                assert!(lo >= t.c_low, "ell {ell} N {n}: {lo}");
                assert!(hi <= t.c_high, "ell {ell} N {n}: {hi}");
                // lower is attained at xi = 0; upper inside the blend,
                // where it reaches 2^{(1 - ell) max_r r (1 - sigma(r))}
                assert!((lo - 1.0).abs() < 1e-12);
                assert!(hi < 1.01 * 2f64.powf((1.0 - ell) * 0.261), "ell {ell} N {n}: {hi}");
            }
        }
    }

    #[test]
    fn homogeneous() {
        let g = Grid::torus(256).unwrap();
        let f = &sample_fields(2, 1, &g, &SpectrumProfile::PowerLaw { alpha: 1.0, max_xi: 80.0 }).unwrap()[0];
        let a = equivalence_ratios(f, 0.5, 16.0).unwrap();
        let b = equivalence_ratios(&f.scaled(-37.0), 0.5, 16.0).unwrap();
        assert!((a.0 - b.0).abs() < 1e-12 * a.0);
        assert!((a.1 - b.1).abs() < 1e-12 * a.1);
    }
}
