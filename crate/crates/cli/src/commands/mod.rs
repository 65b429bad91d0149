//! One module per subcommand. Each writes its artifacts and returns the list
//! of threshold failures; an empty list means success.

pub mod periodic;
pub mod picard;
pub mod simulate;
pub mod stability;
pub mod verify;

use bbm_core::dynamics::{ForcingSpec, Solver, SolverConfig};
use bbm_core::spectral::{Grid, ImethodParams};

use crate::config::RunConfig;
use crate::error::CliError;

/// Objects shared by every subcommand, built once from the validated config.
pub struct Context<'a> {
    pub cfg: &'a RunConfig,
    pub grid: Grid,
    pub params: ImethodParams,
    pub solver_cfg: SolverConfig,
    pub forcing: ForcingSpec,
    pub solver: Solver,
}

impl<'a> Context<'a> {
    pub fn new(cfg: &'a RunConfig) -> Result<Self, CliError> {
        let grid = cfg.grid()?;
        let solver_cfg = cfg.solver_config()?;
        let solver = Solver::new(&grid, &solver_cfg)?;
        Ok(Self {
            cfg,
            params: cfg.imethod()?,
            forcing: cfg.forcing()?,
            grid,
            solver_cfg,
            solver,
        })
    }

    pub fn ell(&self) -> f64 {
        self.params.ell()
    }
}
