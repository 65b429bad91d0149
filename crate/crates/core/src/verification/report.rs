use crate::stats::{fit_loglog, LineFit};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Inequality {
    /// `c ||g||_{H^ell} <= ||I_N g||_{H^1} <= C N^{1-ell} ||g||_{H^ell}`.
    Equivalence,
    /// `int ||(I - d_xx)^{-1} I_N (u v_x)||_{H^1} <= C_T ||I_N u||_Y ||I_N v||_Y`.
    Bilinear,
    /// `|(I_N (u v)_x, I_N w)| <= C N^{-3/2 + eps} prod ||I_N .||_{H^1}`.
    Trilinear,
}

impl Inequality {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Equivalence => "equivalence",
            Self::Bilinear => "bilinear",
            Self::Trilinear => "trilinear",
        }
    }
}

/// Worst ratio at one value of the swept parameter (`N`, or `T` for the
/// bilinear estimate).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateRow {
    pub param: f64,
    pub worst_ratio: f64,
    /// Lower constant, for two-sided estimates.
    pub lower_ratio: Option<f64>,
}

/// One pass/fail criterion of a report.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            value,
            threshold,
            pass: value >= threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    pub inequality: Inequality,
    pub ell: f64,
    pub samples: usize,
    pub worst_ratio: f64,
    pub rows: Vec<EstimateRow>,
    /// Log-log slope of the worst ratio against the swept parameter; only
    /// with at least 4 parameter values.
    pub slope: Option<LineFit>,
    pub checks: Vec<Check>,
    /// Informational statistics that do not enter `pass`.
    pub diagnostics: Vec<(String, f64)>,
}

impl EstimateReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Human-readable multi-line summary.
    pub fn summary(&self) -> String {
        let mut out = format!(
            "{} (ell = {}, {} samples): worst ratio {:.6e}\n",
            self.inequality.name(),
            self.ell,
            self.samples,
            self.worst_ratio
        );
        for row in &self.rows {
            match row.lower_ratio {
                Some(lo) => out.push_str(&format!(
                    "  param {:>8}: upper {:.6e}  lower {:.6e}\n",
                    row.param, row.worst_ratio, lo
                )),
                None => out.push_str(&format!("  param {:>8}: worst {:.6e}\n", row.param, row.worst_ratio)),
            }
        }
        if let Some(fit) = &self.slope {
            let (lo, hi) = fit.slope_interval();
            out.push_str(&format!("  slope {:.4} (95% band [{lo:.4}, {hi:.4}])\n", fit.slope));
        }
        for c in &self.checks {
            out.push_str(&format!(
                "  [{}] {}: {:.6e} vs {:.6e}\n",
                if c.pass { "pass" } else { "FAIL" },
                c.name,
                c.value,
                c.threshold
            ));
        }
        for (name, value) in &self.diagnostics {
            out.push_str(&format!("  (info) {name}: {value:.6e}\n"));
        }
        out
    }
}

/// Slope of `log worst_ratio` against `log param` when at least 4 rows have
/// positive ratios.
pub(crate) fn rows_slope(rows: &[EstimateRow]) -> Option<LineFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.worst_ratio > 0.0)
        .map(|r| (r.param, r.worst_ratio))
        .unzip();
    if rows.len() < 4 || x.len() < rows.len() {
        return None;
    }
    fit_loglog(&x, &y).ok()
}

/// `max / min` of positive values, `1` for an empty set, `inf` if any is zero.
pub(crate) fn spread(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    let mut any = false;
    for v in values {
        any = true;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !any {
        1.0
    } else if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}
