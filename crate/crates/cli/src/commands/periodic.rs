use serde_json::json;

use bbm_core::io::fmt_f64;
use bbm_core::orbit::{poincare_iterate, OrbitOptions, OrbitResult};
use bbm_core::spectral::SpectralField;

use super::Context;
use crate::config::purpose;
use crate::error::CliError;
use crate::output::{num, Artifacts};

pub fn orbit_options(ctx: &Context) -> Result<OrbitOptions, CliError> {
    let o = &ctx.cfg.orbit;
    let mut opts = OrbitOptions::new(ctx.cfg.theta()?, ctx.ell());
    opts.k_max = o.k_max;
    opts.abs_tol = o.abs_tol;
    opts.rel_tol = o.rel_tol;
    Ok(opts)
}

/// Runs the Poincaré iteration from `[initial]` and writes `differences.csv`.
pub fn find_orbit(ctx: &Context, out: &mut Artifacts) -> Result<(OrbitResult, OrbitOptions), CliError> {
    let cfg = ctx.cfg;
    let opts = orbit_options(ctx)?;
    let phi0 = cfg.field("initial", &cfg.initial, &ctx.grid, purpose::INITIAL)?;
    let result = poincare_iterate(&phi0, &ctx.forcing, &opts, &ctx.solver)?;
    let rows: Vec<Vec<String>> = result
        .differences
        .iter()
        .enumerate()
        .map(|(k, &d)| vec![(k + 1).to_string(), fmt_f64(d)])
        .collect();
    out.csv("differences.csv", &["k", "diff_norm"], &rows)?;
    Ok((result, opts))
}

pub fn run(ctx: &Context, out: &mut Artifacts) -> Result<Vec<String>, CliError> {
    let (result, opts) = find_orbit(ctx, out)?;
    out.field("phi", &result.phi)?;
    let period = ctx.solver.evolve(&result.phi, &ctx.forcing, 0.0, opts.theta)?;
    let sq = period.norms(|f| f.sobolev_norm_sq(ctx.ell()));
    out.series("orbit.csv", ["t", "sq_norm"], &period.times(), &sq)?;
    let regenerated: &SpectralField = period.last();
    let regen = (regenerated - &result.phi).sobolev_norm(ctx.ell());
    let ratios: Vec<_> = result.contraction_ratios().into_iter().map(num).collect();
    out.json(
        "summary.json",
        &json!({
            "command": "find-periodic",
            "config_hash": out.hash(),
            "theta": num(opts.theta),
            "iterations": result.iterations,
            "residual": num(result.residual),
            "tolerance": num(opts.tolerance(result.phi.sobolev_norm(ctx.ell()))),
            "regeneration_residual": num(regen),
            "phi_h_ell_norm": num(result.phi.sobolev_norm(ctx.ell())),
            "contraction_ratios": ratios,
        }),
    )?;
    Ok(Vec::new())
}
