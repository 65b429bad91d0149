use serde_json::json;

use bbm_core::dynamics::{Trajectory, Variant};
use bbm_core::io::fmt_f64;
use bbm_core::orbit::{
    absorbing_check_trajectory, decay_fit, error_evolve, local_stability_experiment, two_phase_experiment,
    Perturbation, StabilityOptions, TwoPhaseOptions,
};
use bbm_core::spectral::{i_h1_norm, SpectralField};

use super::periodic::find_orbit;
use super::Context;
use crate::config::purpose;
use crate::error::CliError;
use crate::output::{num, opt_num, Artifacts};

pub fn run(ctx: &Context, out: &mut Artifacts) -> Result<Vec<String>, CliError> {
    let cfg = ctx.cfg;
    let st = &cfg.stability;
    let ell = ctx.ell();
    let mut failures = Vec::new();

    let (orbit, _) = find_orbit(ctx, out)?;
    out.field("phi", &orbit.phi)?;

    let shape = cfg.field("stability.perturbation", &st.perturbation, &ctx.grid, purpose::PERTURBATION)?;
    let shape_norm = shape.sobolev_norm(ell);
    if shape_norm == 0.0 {
        return Err(CliError::Config {
            path: "stability.perturbation".into(),
            reason: "perturbation shape vanishes on the grid".into(),
        });
    }
    let shape = shape.scaled(1.0 / shape_norm);
    let perturbations: Vec<Perturbation> = st
        .epsilons
        .iter()
        .map(|&epsilon| Perturbation {
            epsilon,
            shape: shape.clone(),
        })
        .collect();
    let opts = StabilityOptions {
        horizon: st.horizon,
        fit_start: st.fit_start,
        fit_end: st.fit_end,
        ell,
    };
    let runs = local_stability_experiment(&orbit.phi, &perturbations, &ctx.forcing, &ctx.solver, &opts)?;
    let mut rate_rows = Vec::new();
    let mut rates = Vec::new();
    for (i, run) in runs.iter().enumerate() {
        out.series(&format!("decay_eps_{i:03}.csv"), ["t", "sq_norm"], &run.times, &run.sq_norms)?;
        let Some(fit) = run.fit else {
            rates.push(json!({ "epsilon": num(run.epsilon), "exact_orbit": true }));
            continue;
        };
        let in_band = fit.gamma > st.gamma_min && fit.gamma <= st.gamma_max;
        if !in_band {
            failures.push(format!(
                "epsilon {}: gamma {:.10} outside ({}, {}]",
                run.epsilon, fit.gamma, st.gamma_min, st.gamma_max
            ));
        }
        rate_rows.push(vec![
            fmt_f64(run.epsilon),
            fmt_f64(fit.gamma),
            fmt_f64(fit.sigma),
            fmt_f64(fit.residual),
            fit.points.to_string(),
            fmt_f64(run.final_difference),
        ]);
        rates.push(json!({
            "epsilon": num(run.epsilon),
            "gamma": num(fit.gamma),
            "residual": num(fit.residual),
            "in_band": in_band,
        }));
    }
    out.csv(
        "rates.csv",
        &["epsilon", "gamma", "sigma", "residual", "points", "final_difference"],
        &rate_rows,
    )?;

    let oracle = if st.oracle && cfg.solver.stride == 1 && ctx.solver_cfg.variant == Variant::BbmDamped {
        let steps = (st.horizon / cfg.solver.dt).round() as usize;
        let zero = Trajectory::constant(&SpectralField::zeros(&ctx.grid), 0.0, cfg.solver.dt, steps + 1)?;
        let w = error_evolve(&shape, &zero, &ctx.solver_cfg)?;
        let energies = w.norms(|f| i_h1_norm(f, &ctx.params).powi(2));
        out.series("oracle.csv", ["t", "sq_norm"], &w.times(), &energies)?;
        let fit = decay_fit(&w.times(), &energies, st.fit_start, st.fit_end)?;
        if (fit.gamma - 1.0).abs() > st.oracle_tolerance {
            failures.push(format!("a = 0 oracle: gamma {:.10} not within {} of 1", fit.gamma, st.oracle_tolerance));
        }
        Some(fit.gamma)
    } else {
        None
    };

    let absorbing = if st.absorbing.enabled {
        let a = &st.absorbing;
        let datum = cfg.field("stability.absorbing.datum", &a.datum, &ctx.grid, purpose::ABSORBING_DATUM)?;
        let two = two_phase_experiment(
            &datum,
            &orbit.phi,
            &ctx.forcing,
            &ctx.params,
            &ctx.solver,
            &TwoPhaseOptions {
                horizon: a.horizon,
                pilot_horizon: a.pilot_horizon,
                margin: a.margin,
                post_entry_window: a.post_entry_window,
                ell,
            },
        )?;
        out.series("pilot.csv", ["t", "sq_norm"], &two.pilot.times, &two.pilot.energies)?;
        let rows: Vec<Vec<String>> = two
            .absorbing
            .samples
            .iter()
            .map(|s| vec![fmt_f64(s.t), fmt_f64(s.lhs), fmt_f64(s.rhs)])
            .collect();
        out.csv("absorbing.csv", &["t", "lhs", "rhs"], &rows)?;
        out.series("orbit_distance.csv", ["t", "sq_norm"], &two.times, &two.orbit_sq_distance)?;

        let rep = &two.absorbing;
        let worst = rep.samples.iter().map(|s| s.lhs / s.rhs).fold(0.0, f64::max);
        if !rep.holds() {
            let first = rep.violations[0];
            failures.push(format!(
                "absorbing inequality violated at {} samples (first t = {}, lhs {:.6e} > rhs {:.6e})",
                rep.violations.len(),
                first.t,
                first.lhs,
                first.rhs
            ));
        }
        if rep.entry_time.is_none() {
            failures.push("no entry into the absorbing ball within the horizon".into());
        }
        match two.post_entry {
            Some(fit) if fit.gamma > 0.0 => {}
            Some(fit) => failures.push(format!("post-entry rate {:.6} is not positive", fit.gamma)),
            None => failures.push("post-entry window does not fit in the horizon".into()),
        }
        // The energy argument behind the inequality splits the forcing term
        // with weight 1/2, leaving damping rate gamma_1 - 1/2.
        let half_rate = rep.gamma1 - 0.5;
        let half = if half_rate > 0.0 {
            let traj = ctx.solver.evolve(&datum, &ctx.forcing, 0.0, a.horizon)?;
            Some(absorbing_check_trajectory(&traj, &ctx.forcing, &ctx.params, half_rate, a.margin)?.violations.len())
        } else {
            None
        };
        Some(json!({
            "gamma1": num(rep.gamma1),
            "gamma1_least_squares": num(two.pilot.fit.gamma),
            "sup_forcing": num(rep.sup_forcing),
            "radius": num(rep.radius),
            "violations": rep.violations.len(),
            "worst_lhs_over_rhs": num(worst),
            "entry_time": opt_num(rep.entry_time),
            "post_entry_gamma": opt_num(two.post_entry.map(|f| f.gamma)),
            "violations_at_gamma1_minus_half": half,
        }))
    } else {
        None
    };

    out.json(
        "summary.json",
        &json!({
            "command": "stability",
            "config_hash": out.hash(),
            "orbit_iterations": orbit.iterations,
            "orbit_residual": num(orbit.residual),
            "rates": rates,
            "oracle_gamma": opt_num(oracle),
            "absorbing": absorbing,
            "failures": failures,
        }),
    )?;
    Ok(failures)
}
