use serde_json::json;

use bbm_core::dynamics::lwp_bound_check;
use bbm_core::io::fmt_f64;

use super::Context;
use crate::config::purpose;
use crate::error::CliError;
use crate::output::{num, Artifacts};

pub fn run(ctx: &Context, out: &mut Artifacts) -> Result<Vec<String>, CliError> {
    let cfg = ctx.cfg;
    let sim = &cfg.simulate;
    let phi = cfg.field("initial", &cfg.initial, &ctx.grid, purpose::INITIAL)?;
    let traj = ctx.solver.evolve(&phi, &ctx.forcing, 0.0, sim.t_end)?;
    out.trajectory("trajectory.csv", &traj, &ctx.params)?;

    let dump_times = if sim.dump_times.is_empty() {
        vec![0.0, traj.t_end()]
    } else {
        sim.dump_times.clone()
    };
    let mut dumps = Vec::new();
    for (i, &t) in dump_times.iter().enumerate() {
        let idx = traj.index_of_time(t).ok_or_else(|| CliError::Config {
            path: format!("simulate.dump_times[{i}]"),
            reason: format!("t = {t} is not a stored snapshot time"),
        })?;
        let stem = format!("snapshot_{i:03}");
        out.field(&stem, traj.snapshot(idx))?;
        dumps.push(json!({ "file": format!("{stem}.bbm1"), "t": num(traj.time(idx)) }));
    }

    let mut lwp_rows = Vec::new();
    let mut lwp = Vec::new();
    for &window in &sim.lwp_windows {
        let r = lwp_bound_check(&traj, &phi, &ctx.forcing, ctx.ell(), 0.0, window)?;
        lwp_rows.push(vec![
            fmt_f64(0.0),
            fmt_f64(window),
            fmt_f64(r.lhs),
            fmt_f64(r.rhs_raw),
            fmt_f64(r.ratio),
        ]);
        lwp.push(json!({ "duration": num(window), "lhs": num(r.lhs), "rhs_raw": num(r.rhs_raw), "ratio": num(r.ratio) }));
    }
    out.csv("lwp.csv", &["tau", "duration", "lhs", "rhs_raw", "ratio"], &lwp_rows)?;

    let last = traj.last();
    out.json(
        "summary.json",
        &json!({
            "command": "simulate",
            "config_hash": out.hash(),
            "snapshots": traj.len(),
            "t_end": num(traj.t_end()),
            "final_l2_norm": num(last.l2_norm()),
            "final_h_ell_norm": num(last.sobolev_norm(ctx.ell())),
            "dumps": dumps,
            "lwp": lwp,
        }),
    )?;
    Ok(Vec::new())
}
