//! Experiment driver for the BBM toolkit: `simulate`, `find-periodic`,
//! `verify`, `stability` and `picard`, each driven by one TOML config.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 configuration error,
//! 3 threshold failure.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::RunConfig;
pub use error::CliError;

use commands::Context;
use output::Artifacts;

/// Overrides `--out` and the config's `out`.
pub const OUT_ENV: &str = "BBM_ORBIT_OUT";

#[derive(Debug, Parser)]
#[command(name = "bbm-orbit", version, about = "Forced damped BBM: simulation, periodic orbits and I-method checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct CommonArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for parallel sweeps.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve initial data and write the trajectory norms, snapshots and LWP report.
    Simulate(CommonArgs),
    /// Poincaré iteration to the periodic orbit.
    FindPeriodic(CommonArgs),
    /// Empirical checks of the I-method inequalities.
    Verify(CommonArgs),
    /// Local stability, the a = 0 oracle and the absorbing-ball experiment.
    Stability(CommonArgs),
    /// Picard splitting u = v + z and the windowed bounds.
    Picard(CommonArgs),
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Self::Simulate(a) | Self::FindPeriodic(a) | Self::Verify(a) | Self::Stability(a) | Self::Picard(a) => a,
        }
    }
}

fn out_dir(args: &CommonArgs, cfg: &RunConfig) -> PathBuf {
    if let Some(env) = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(env);
    }
    args.out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("bbm-out"))
}

fn execute(command: &Command, cfg: &RunConfig, out: &mut Artifacts) -> Result<Vec<String>, CliError> {
    let ctx = Context::new(cfg)?;
    match command {
        Command::Simulate(_) => commands::simulate::run(&ctx, out),
        Command::FindPeriodic(_) => commands::periodic::run(&ctx, out),
        Command::Verify(_) => commands::verify::run(&ctx, out),
        Command::Stability(_) => commands::stability::run(&ctx, out),
        Command::Picard(_) => commands::picard::run(&ctx, out),
    }
}

#[cfg(feature = "parallel")]
fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config {
                    path: "--jobs".into(),
                    reason: e.to_string(),
                })?;
            Ok(pool.install(f))
        }
    }
}

#[cfg(not(feature = "parallel"))]
fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    if jobs.is_some_and(|n| n > 1) {
        log::warn!("built without the `parallel` feature; --jobs is ignored");
    }
    Ok(f())
}

fn report(err: &CliError, out: Option<&Artifacts>) -> i32 {
    eprintln!("bbm-orbit: {err}");
    if let Some(out) = out {
        let mut text = serde_json::to_string_pretty(&err.record()).expect("record serializes");
        text.push('\n');
        if let Err(io) = std::fs::write(out.dir().join("error.json"), text) {
            eprintln!("bbm-orbit: could not write error.json: {io}");
        }
    }
    err.exit_code()
}

fn run_parsed(cli: Cli) -> i32 {
    let args = cli.command.common().clone();
    if args.jobs == Some(0) {
        return report(
            &CliError::Config {
                path: "--jobs".into(),
                reason: "must be at least 1".into(),
            },
            None,
        );
    }
    let mut cfg = match RunConfig::load(&args.config) {
        Ok(cfg) => cfg,
        Err(e) => return report(&e, None),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let dir = out_dir(&args, &cfg);
    let mut out = match Artifacts::create(&dir, cfg.hash()) {
        Ok(out) => out,
        Err(e) => return report(&e, None),
    };
    let result = with_jobs(args.jobs, || execute(&cli.command, &cfg, &mut out)).and_then(|r| r);
    match result {
        Ok(failures) if failures.is_empty() => {
            log::info!("wrote {} artifacts to {}", out.written().len(), dir.display());
            0
        }
        Ok(failures) => report(&CliError::Threshold(failures.join("; ")), Some(&out)),
        Err(e) => report(&e, Some(&out)),
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run_parsed(cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
    }
}
