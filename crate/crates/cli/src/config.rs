use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vdl_core::barenblatt::BarenblattProfile;
use vdl_core::solver::{domain_for, Grid1D, PerturbationSpec, SolverConfig};
use vdl_core::GasModel;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_cells: usize,
    /// Defaults to `1.25 R(t_end)`.
    pub half_width: Option<f64>,
}

/// Snapshot times: explicit, or `count` log-spaced in `1 + t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub times: Option<Vec<f64>>,
    pub count: Option<usize>,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            times: None,
            count: Some(40),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub gamma: f64,
    pub mass: f64,
    #[serde(default)]
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub perturbation: PerturbationSpec,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|reason| CliError::Config {
            path: path.to_path_buf(),
            reason,
        })
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let cfg: Self = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every precondition before any work is done.
    pub fn validate(&self) -> Result<(), String> {
        let gas = GasModel::new(self.gamma).map_err(|e| e.to_string())?;
        BarenblattProfile::new(gas, self.mass).map_err(|e| e.to_string())?;
        self.solver.validate().map_err(|e| e.to_string())?;
        if !(self.solver.t_end > 0.0) {
            return Err(format!(
                "solver.t_end = {} must be positive",
                self.solver.t_end
            ));
        }
        if let Some(h) = self.grid.half_width {
            if !(h > 0.0 && h.is_finite()) {
                return Err(format!("grid.half_width = {h} must be positive"));
            }
        }
        if let Some(ts) = &self.schedule.times {
            if let Some(t) = ts
                .iter()
                .find(|t| !(**t >= 0.0 && **t <= self.solver.t_end))
            {
                return Err(format!("schedule time {t} lies outside [0, t_end]"));
            }
        }
        if self.schedule.count == Some(0) || self.schedule.count == Some(1) {
            return Err("schedule.count needs at least 2 snapshots".into());
        }
        let grid = self.grid().map_err(|e| e.to_string())?;
        let profile = self.profile().map_err(|e| e.to_string())?;
        vdl_core::solver::init_from_profile(&profile, &grid, &self.perturbation)
            .map_err(|e| e.to_string())?;
        Ok(())
    }

    pub fn gas(&self) -> vdl_core::Result<GasModel> {
        GasModel::new(self.gamma)
    }

    pub fn profile(&self) -> vdl_core::Result<BarenblattProfile> {
        BarenblattProfile::new(self.gas()?, self.mass)
    }

    pub fn grid(&self) -> vdl_core::Result<Grid1D> {
        match self.grid.half_width {
            Some(h) => Grid1D::symmetric(h, self.grid.n_cells),
            None => domain_for(&self.profile()?, self.solver.t_end, self.grid.n_cells),
        }
    }

    /// Solver settings with the snapshot schedule filled in.
    pub fn solver_config(&self) -> SolverConfig {
        let mut c = self.solver.clone();
        c.snapshots = match (&self.schedule.times, self.schedule.count) {
            (Some(ts), _) => ts.clone(),
            (None, Some(n)) => SolverConfig::log_schedule(0.0, c.t_end, n),
            (None, None) => vec![0.0, c.t_end],
        };
        c
    }
}
