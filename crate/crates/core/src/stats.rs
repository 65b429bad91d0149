//! Ordinary least squares on a line, with a Student-t band on the slope.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; zero for an exact fit or two points.
    pub slope_std_err: f64,
    /// Half-width of the 95% confidence interval on the slope.
    pub slope_half_width: f64,
    /// Root-mean-square residual.
    pub rms_residual: f64,
    pub points: usize,
}

impl LineFit {
    pub fn slope_interval(&self) -> (f64, f64) {
        (self.slope - self.slope_half_width, self.slope + self.slope_half_width)
    }
}

/// Fits `y = intercept + slope x`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(Error::Fit(format!("{} abscissae for {} values", x.len(), y.len())));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::Fit(format!("need at least 2 points, got {n}")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite input".into()));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("degenerate abscissae".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let (slope_std_err, slope_half_width) = if n > 2 {
        let se = (ssr / (nf - 2.0) / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, nf - 2.0)
            .map_err(|e| Error::Fit(e.to_string()))?
            .inverse_cdf(0.975);
        (se, t * se)
    } else {
        (0.0, 0.0)
    };
    Ok(LineFit {
        slope,
        intercept,
        slope_std_err,
        slope_half_width,
        rms_residual: (ssr / nf).sqrt(),
        points: n,
    })
}

/// Fits `log y` against `log x`; all values must be positive.
pub fn fit_loglog(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.iter().chain(y).any(|&v| !(v > 0.0)) {
        return Err(Error::Fit("log-log fit needs positive values".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    fit_line(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-15);
        assert!((f.intercept - 2.0).abs() < 1e-15);
        assert!(f.slope_half_width < 1e-14);
    }

    #[test]
    fn t_band_width() {
        // residuals +-1 alternating on x = 0..4
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y = [1.0, -1.0, 1.0, -1.0, 1.0];
        let f = fit_line(&x, &y).unwrap();
        let t3 = StudentsT::new(0.0, 1.0, 3.0).unwrap().inverse_cdf(0.975);
        assert!((t3 - 3.182446).abs() < 1e-5);
        assert!((f.slope_half_width - t3 * f.slope_std_err).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_line(&[1.0], &[1.0]).is_err());
        assert!(fit_line(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(fit_loglog(&[1.0, 2.0], &[0.0, 1.0]).is_err());
    }
}
