use crate::error::{Error, Result};
use crate::gas::GasModel;

use super::config::SolverConfig;
use super::scheme::Solver;
use super::state::FieldState;

/// Called with the initial state and after every step.
pub trait Observer {
    fn start(&mut self, _state: &FieldState) -> Result<()> {
        Ok(())
    }

    fn observe(&mut self, state: &FieldState, dt: f64) -> Result<()>;
}

impl<F: FnMut(&FieldState, f64) -> Result<()>> Observer for F {
    fn observe(&mut self, state: &FieldState, dt: f64) -> Result<()> {
        self(state, dt)
    }
}

/// Tracks the mechanical energy and its largest per-step increase.
#[derive(Debug, Clone)]
pub struct EnergyMonitor {
    gas: GasModel,
    floor: f64,
    pub initial: f64,
    pub last: f64,
    /// Largest `(E_new - E_old) / E_initial` over all steps.
    pub max_relative_increase: f64,
    pub steps: u64,
}

impl EnergyMonitor {
    pub fn new(gas: GasModel, floor: f64) -> Self {
        Self {
            gas,
            floor,
            initial: f64::NAN,
            last: f64::NAN,
            max_relative_increase: f64::NEG_INFINITY,
            steps: 0,
        }
    }
}

impl Observer for EnergyMonitor {
    fn start(&mut self, state: &FieldState) -> Result<()> {
        self.initial = state.mechanical_energy(&self.gas, self.floor);
        self.last = self.initial;
        Ok(())
    }

    fn observe(&mut self, state: &FieldState, _dt: f64) -> Result<()> {
        let e = state.mechanical_energy(&self.gas, self.floor);
        let rise = (e - self.last) / self.initial.abs().max(f64::MIN_POSITIVE);
        self.max_relative_increase = self.max_relative_increase.max(rise);
        self.last = e;
        self.steps += 1;
        Ok(())
    }
}

/// Tracks `max rho` and `max |m| / max(rho, floor)`.
#[derive(Debug, Clone)]
pub struct InvariantRegionMonitor {
    floor: f64,
    pub initial_ratio: f64,
    pub initial_max_rho: f64,
    pub max_ratio: f64,
    pub max_rho: f64,
}

impl InvariantRegionMonitor {
    pub fn new(floor: f64) -> Self {
        Self {
            floor,
            initial_ratio: 0.0,
            initial_max_rho: 0.0,
            max_ratio: 0.0,
            max_rho: 0.0,
        }
    }
}

impl Observer for InvariantRegionMonitor {
    fn start(&mut self, state: &FieldState) -> Result<()> {
        self.initial_ratio = state.max_speed_ratio(self.floor);
        self.initial_max_rho = state.max_rho();
        self.max_ratio = self.initial_ratio;
        self.max_rho = self.initial_max_rho;
        Ok(())
    }

    fn observe(&mut self, state: &FieldState, _dt: f64) -> Result<()> {
        self.max_ratio = self.max_ratio.max(state.max_speed_ratio(self.floor));
        self.max_rho = self.max_rho.max(state.max_rho());
        Ok(())
    }
}

/// Snapshot times inside `[t0, t_end]`, sorted and deduplicated; `[t_end]` if none.
fn targets(config: &SolverConfig, t0: f64) -> Vec<f64> {
    let mut v: Vec<f64> = config
        .snapshots
        .iter()
        .copied()
        .filter(|&s| s >= t0 && s <= config.t_end)
        .collect();
    if v.is_empty() {
        v.push(config.t_end);
    }
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Advances `state` to `config.t_end` and returns the scheduled snapshots.
/// The floor is resolved against the maximum density of `state`.
pub fn run(
    state: FieldState,
    config: &SolverConfig,
    gas: &GasModel,
    observers: &mut [&mut dyn Observer],
) -> Result<Vec<FieldState>> {
    let solver = Solver::new(*gas, config.clone(), state.max_rho())?;
    run_with(&solver, state, observers)
}

/// [`run`] with an already resolved solver.
pub fn run_with(
    solver: &Solver,
    mut state: FieldState,
    observers: &mut [&mut dyn Observer],
) -> Result<Vec<FieldState>> {
    let config = solver.config();
    if !(config.t_end >= state.t) {
        return Err(crate::error::invalid(
            "t_end",
            config.t_end,
            "must not precede the initial time",
        ));
    }
    for o in observers.iter_mut() {
        o.start(&state)?;
    }
    let mut out = Vec::new();
    let mut steps = 0u64;
    for target in targets(config, state.t) {
        while state.t < target {
            if steps >= config.max_steps {
                return Err(Error::TimeStep {
                    t: state.t,
                    reason: format!("step budget {} exhausted", config.max_steps),
                });
            }
            let dt = solver.step(&mut state, target)?;
            steps += 1;
            for o in observers.iter_mut() {
                o.observe(&state, dt)?;
            }
        }
        out.push(state.clone());
    }
    while state.t < config.t_end {
        let dt = solver.step(&mut state, config.t_end)?;
        for o in observers.iter_mut() {
            o.observe(&state, dt)?;
        }
    }
    Ok(out)
}
