use serde_json::json;

use bbm_core::dynamics::linear_trajectory;
use bbm_core::io::fmt_f64;
use bbm_core::picard::{geometric_envelope, picard_solve_windows, window_bound_check, PicardOptions};

use super::Context;
use crate::config::purpose;
use crate::error::CliError;
use crate::output::{num, opt_num, Artifacts};

pub fn run(ctx: &Context, out: &mut Artifacts) -> Result<Vec<String>, CliError> {
    let cfg = ctx.cfg;
    let p = &cfg.picard;
    if cfg.solver.stride != 1 {
        return Err(CliError::Config {
            path: "solver.stride".into(),
            reason: "picard compares against the solver on the full mesh; stride must be 1".into(),
        });
    }
    let span = p.window * p.windows as f64;
    let phi = cfg.field("initial", &cfg.initial, &ctx.grid, purpose::INITIAL)?;
    let v = linear_trajectory(&phi, &ctx.forcing, span, cfg.solver.dt, ctx.solver_cfg.variant)?;
    let opts = PicardOptions {
        tol: p.tol,
        max_iter: p.max_iter,
        contraction_threshold: p.contraction_threshold,
        dealias: cfg.solver.dealias,
    };
    let (z, reports) = picard_solve_windows(&v, p.window, p.windows, &ctx.params, &opts)?;
    let u = ctx.solver.evolve(&phi, &ctx.forcing, 0.0, span)?;
    let split_error = v.sum(&z)?.difference(&u)?.norms(|f| f.sobolev_norm(ctx.ell()));
    out.series("splitting.csv", ["t", "split_error"], &u.times(), &split_error)?;

    let mut failures = Vec::new();
    let mut window_json = Vec::new();
    for (j, r) in reports.iter().enumerate() {
        let rows: Vec<Vec<String>> = r
            .rows()
            .into_iter()
            .map(|(iter, update, ratio)| vec![iter.to_string(), fmt_f64(update), fmt_f64(ratio)])
            .collect();
        out.csv(&format!("picard_window_{j:03}.csv"), &["iter", "update_norm", "ratio"], &rows)?;
        if let Some(cf) = r.contraction_factor {
            if cf > p.max_contraction {
                failures.push(format!("window {j}: contraction factor {cf:.3e} above {}", p.max_contraction));
            }
        }
        if !r.in_s_v() {
            failures.push(format!("window {j}: z leaves S_v (||z|| / ||v|| = {:.3e})", r.z_over_v));
        }
        window_json.push(json!({
            "window": j,
            "iterations": r.iterations,
            "contraction_factor": opt_num(r.contraction_factor),
            "v_norm": num(r.v_norm),
            "z_norm": num(r.z_norm),
            "z_over_v": num(r.z_over_v),
        }));
    }

    let check = window_bound_check(&z, &v, &ctx.params, p.window)?;
    let rows: Vec<Vec<String>> = check
        .windows
        .iter()
        .map(|w| {
            vec![
                w.index.to_string(),
                fmt_f64(w.tau),
                fmt_f64(w.z_start),
                fmt_f64(w.z_end),
                fmt_f64(w.z_window),
                fmt_f64(w.v_window),
                fmt_f64(w.shifted_bound),
                w.shifted_ok.to_string(),
                fmt_f64(w.mesh_bound),
                w.mesh_ok.to_string(),
            ]
        })
        .collect();
    out.csv(
        "windows.csv",
        &[
            "window", "tau", "z_start", "z_end", "z_window", "v_window", "shifted_bound", "shifted_ok", "mesh_bound",
            "mesh_ok",
        ],
        &rows,
    )?;
    for w in check.windows.iter().filter(|w| !(w.shifted_ok && w.mesh_ok)) {
        failures.push(format!(
            "window {}: shifted bound {} mesh bound {}",
            w.index,
            if w.shifted_ok { "ok" } else { "violated" },
            if w.mesh_ok { "ok" } else { "violated" }
        ));
    }
    let envelope = geometric_envelope(&check).ok();

    out.json(
        "summary.json",
        &json!({
            "command": "picard",
            "config_hash": out.hash(),
            "span": num(span),
            "max_split_error": num(split_error.iter().copied().fold(0.0, f64::max)),
            "c_t": num(check.c_t),
            "windows_pass": check.all_pass(),
            "envelope": envelope.map(|e| json!({ "zeta": num(e.zeta), "constant": num(e.constant), "holds": e.holds() })),
            "windows": window_json,
        }),
    )?;
    Ok(failures)
}
