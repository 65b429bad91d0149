//! Log-linear decay fits.

use crate::error::{Error, Result};
use crate::stats::fit_line;

/// Fit of `value ~ amplitude * exp(sigma t)` on `[t_start, t_end]`.
///
/// `gamma = -sigma / 2` follows the `e^{-2 gamma t}` convention for
/// squared-norm series, so pure damping `e^{-t}` of a norm (`e^{-2t}` of its
/// square) gives `gamma = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    pub sigma: f64,
    pub gamma: f64,
    pub amplitude: f64,
    pub t_start: f64,
    pub t_end: f64,
    /// RMS of the residuals of `ln value`, i.e. a relative misfit.
    pub residual: f64,
    pub points: usize,
}

/// Least-squares fit of `ln value` against `t` using the samples with
/// `t_start <= t <= t_end`.
pub fn decay_fit(times: &[f64], values: &[f64], t_start: f64, t_end: f64) -> Result<DecayFit> {
    if times.len() != values.len() {
        return Err(Error::Fit(format!("{} times for {} values", times.len(), values.len())));
    }
    if !(t_end > t_start) {
        return Err(Error::Fit(format!("degenerate window [{t_start}, {t_end}]")));
    }
    let tol = 1e-9 * t_end.abs().max(1.0);
    let mut ts = Vec::new();
    let mut logs = Vec::new();
    for (&t, &v) in times.iter().zip(values) {
        if t < t_start - tol || t > t_end + tol {
            continue;
        }
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Fit(format!("nonpositive value {v:e} at t = {t}")));
        }
        ts.push(t);
        logs.push(v.ln());
    }
    if ts.len() < 5 {
        return Err(Error::Fit(format!(
            "{} samples in [{t_start}, {t_end}]; need at least 5",
            ts.len()
        )));
    }
    let line = fit_line(&ts, &logs)?;
    Ok(DecayFit {
        sigma: line.slope,
        gamma: -0.5 * line.slope,
        amplitude: line.intercept.exp(),
        t_start,
        t_end,
        residual: line.rms_residual,
        points: ts.len(),
    })
}

/// Largest `gamma` with `values[i] <= values[0] e^{-2 gamma (t_i - t_0)}` at
/// every sample: the rate of the tightest exponential envelope anchored at
/// the first sample.
pub fn envelope_rate(times: &[f64], values: &[f64]) -> Result<f64> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::Fit("envelope needs at least two matched samples".into()));
    }
    let v0 = values[0];
    if !(v0 > 0.0) {
        return Err(Error::Fit(format!("nonpositive initial value {v0:e}")));
    }
    let mut rate = f64::INFINITY;
    for (&t, &v) in times.iter().zip(values).skip(1) {
        let dt = t - times[0];
        if !(dt > 0.0) {
            return Err(Error::Fit("times must increase".into()));
        }
        if !(v > 0.0) {
            continue;
        }
        rate = rate.min(-(v / v0).ln() / (2.0 * dt));
    }
    if !rate.is_finite() {
        return Err(Error::Fit("no positive samples after the first".into()));
    }
    Ok(rate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential() {
        let t: Vec<f64> = (0..50).map(|i| i as f64 * 0.2).collect();
        let v: Vec<f64> = t.iter().map(|t| 3.0 * (-0.6 * t).exp()).collect();
        let f = decay_fit(&t, &v, 1.0, 8.0).unwrap();
        assert!((f.sigma + 0.6).abs() < 1e-12);
        assert!((f.gamma - 0.3).abs() < 1e-12);
        assert!((f.amplitude - 3.0).abs() < 1e-10);
        assert!(f.residual < 1e-12);
        assert_eq!(f.points, 36);
        assert!((envelope_rate(&t, &v).unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let t = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let v = [1.0, 0.5, 0.0, 0.1, 0.1, 0.1];
        assert!(decay_fit(&t, &v, 0.0, 5.0).is_err());
        assert!(decay_fit(&t, &v, 3.0, 3.0).is_err());
        assert!(decay_fit(&t, &[1.0; 6], 3.0, 5.0).is_err());
        assert!(decay_fit(&t, &[1.0; 6], 0.0, 5.0).is_ok());
    }
}
