use serde_json::json;

use bbm_core::io::fmt_f64;
use bbm_core::dynamics::Trajectory;
use bbm_core::spectral::ImethodParams;
use bbm_core::verification::{
    adversarial_triples, calibrate_trilinear_constant, sample_mixture, sample_trajectories, split_seed,
    verify_bilinear, verify_equivalence, verify_trilinear, EstimateReport,
};

use super::Context;
use crate::config::{purpose, InequalityName};
use crate::error::CliError;
use crate::output::{num, Artifacts};

pub const ESTIMATE_HEADER: [&str; 5] = ["inequality", "N", "worst_ratio", "slope", "pass"];

/// Rows of the estimate CSV; `N` holds the swept parameter (the window
/// length `T` for the bilinear estimate).
pub fn estimate_rows(report: &EstimateReport) -> Vec<Vec<String>> {
    let slope = report.slope.as_ref().map_or(String::new(), |s| fmt_f64(s.slope));
    let pass = report.pass().to_string();
    report
        .rows
        .iter()
        .map(|row| {
            vec![
                report.inequality.name().to_string(),
                fmt_f64(row.param),
                fmt_f64(row.worst_ratio),
                slope.clone(),
                pass.clone(),
            ]
        })
        .collect()
}

fn report_json(report: &EstimateReport) -> serde_json::Value {
    let checks: Vec<_> = report
        .checks
        .iter()
        .map(|c| json!({ "name": c.name, "value": num(c.value), "threshold": num(c.threshold), "pass": c.pass }))
        .collect();
    let diagnostics: serde_json::Map<_, _> =
        report.diagnostics.iter().map(|(k, v)| (k.clone(), num(*v))).collect();
    json!({
        "inequality": report.inequality.name(),
        "ell": num(report.ell),
        "samples": report.samples,
        "worst_ratio": num(report.worst_ratio),
        "slope": report.slope.as_ref().map_or(serde_json::Value::Null, |s| num(s.slope)),
        "pass": report.pass(),
        "checks": checks,
        "diagnostics": diagnostics,
    })
}

fn run_one(ctx: &Context, which: InequalityName, ell: f64) -> Result<EstimateReport, CliError> {
    let cfg = ctx.cfg;
    let v = &cfg.verify;
    let seed = cfg.seed;
    let n_grid = &cfg.imethod.n_grid;
    match which {
        InequalityName::Equivalence => {
            let e = &v.equivalence;
            let fields = sample_mixture(
                split_seed(seed, purpose::EQUIVALENCE),
                e.samples,
                &ctx.grid,
                &cfg.equivalence_profiles(),
            )?;
            Ok(verify_equivalence(&fields, ell, n_grid, &cfg.equivalence_thresholds())?)
        }
        InequalityName::Bilinear => {
            let b = &v.bilinear;
            let duration = b.t_grid.iter().copied().fold(0.0, f64::max);
            let trajectories = sample_trajectories(
                split_seed(seed, purpose::BILINEAR),
                2 * b.pairs,
                &ctx.grid,
                &b.profile.profile(),
                b.dt,
                duration,
            )?;
            let mut it = trajectories.into_iter();
            let mut pairs: Vec<(Trajectory, Trajectory)> = Vec::with_capacity(b.pairs);
            while let (Some(u), Some(w)) = (it.next(), it.next()) {
                pairs.push((u, w));
            }
            let params = ImethodParams::new(ell, cfg.imethod.n)?;
            Ok(verify_bilinear(&pairs, &params, &b.t_grid, b.growth_limit)?)
        }
        InequalityName::Trilinear => {
            let t = &v.trilinear;
            let draw = |purpose: u64, count: usize| {
                let base = split_seed(seed, purpose);
                n_grid
                    .iter()
                    .enumerate()
                    .map(|(i, &n)| adversarial_triples(split_seed(base, i as u64), count, &ctx.grid, n))
                    .collect::<Vec<_>>()
            };
            let pilot = draw(purpose::TRILINEAR_PILOT, t.pilot_samples);
            let constant = calibrate_trilinear_constant(&ctx.grid, ell, n_grid, t.epsilon, &pilot, t.safety)?;
            let triples = draw(purpose::TRILINEAR, t.samples);
            Ok(verify_trilinear(&ctx.grid, &triples, ell, n_grid, t.epsilon, Some(&constant))?)
        }
    }
}

pub fn run(ctx: &Context, out: &mut Artifacts) -> Result<Vec<String>, CliError> {
    let mut failures = Vec::new();
    let mut all_rows = Vec::new();
    let mut reports = Vec::new();
    let mut text = String::new();
    for ell in ctx.cfg.ell_grid() {
        for &which in &ctx.cfg.verify.inequalities {
            let report = run_one(ctx, which, ell)?;
            let rows = estimate_rows(&report);
            out.csv(
                &format!("{}_ell_{}.csv", report.inequality.name(), fmt_f64(ell)),
                &ESTIMATE_HEADER,
                &rows,
            )?;
            all_rows.extend(rows);
            if !report.pass() {
                let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
                failures.push(format!("{} at ell = {ell}: {}", report.inequality.name(), failed.join(", ")));
            }
            text.push_str(&report.summary());
            text.push('\n');
            reports.push(report_json(&report));
        }
    }
    out.csv("estimates.csv", &ESTIMATE_HEADER, &all_rows)?;
    std::fs::write(out.dir().join("summary.txt"), &text)?;
    out.json(
        "summary.json",
        &json!({
            "command": "verify",
            "config_hash": out.hash(),
            "reports": reports,
        }),
    )?;
    Ok(failures)
}
