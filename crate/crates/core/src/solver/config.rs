use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reconstruction {
    FirstOrder,
    MusclMinmod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeIntegrator {
    ForwardEuler,
    /// Two-stage strong-stability-preserving Runge-Kutta.
    SspRk2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Zero-gradient ghost cells.
    Outflow,
    Periodic,
}

/// Which parts of the split operator are applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Physics {
    /// Flux and damping, Strang split.
    Full,
    /// Undamped Euler equations.
    FluxOnly,
    /// Damping ODE only.
    SourceOnly,
}

/// Density floor, either absolute or relative to the initial maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Floor {
    Absolute(f64),
    Relative(f64),
}

impl Floor {
    pub fn resolve(&self, max_rho: f64) -> f64 {
        match *self {
            Self::Absolute(v) => v,
            Self::Relative(r) => r * max_rho,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub cfl: f64,
    pub reconstruction: Reconstruction,
    pub integrator: TimeIntegrator,
    pub boundary: Boundary,
    pub physics: Physics,
    pub rho_floor: Floor,
    pub t_end: f64,
    /// Times at which snapshots are taken; the step size is clipped to land on them.
    pub snapshots: Vec<f64>,
    /// Abort after this many steps.
    pub max_steps: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            cfl: 0.45,
            reconstruction: Reconstruction::MusclMinmod,
            integrator: TimeIntegrator::ForwardEuler,
            boundary: Boundary::Outflow,
            physics: Physics::Full,
            rho_floor: Floor::Relative(1e-13),
            t_end: 1.0,
            snapshots: Vec::new(),
            max_steps: 50_000_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(invalid("cfl", self.cfl, "must lie in (0, 1)"));
        }
        let floor_ok = match self.rho_floor {
            Floor::Absolute(v) | Floor::Relative(v) => v > 0.0 && v.is_finite(),
        };
        if !floor_ok {
            let v = match self.rho_floor {
                Floor::Absolute(v) | Floor::Relative(v) => v,
            };
            return Err(invalid("rho_floor", v, "must be positive"));
        }
        if !self.t_end.is_finite() {
            return Err(invalid("t_end", self.t_end, "must be finite"));
        }
        if let Some(&s) = self.snapshots.iter().find(|s| !s.is_finite()) {
            return Err(invalid("snapshots", s, "must be finite"));
        }
        Ok(())
    }

    /// `n` snapshot times log-spaced in `1 + t` over `[t0, t_end]`, plus `t0`.
    pub fn log_schedule(t0: f64, t_end: f64, n: usize) -> Vec<f64> {
        let (l0, l1) = ((1.0 + t0).ln(), (1.0 + t_end).ln());
        let mut v: Vec<f64> = (0..n.max(2))
            .map(|i| (l0 + (l1 - l0) * i as f64 / (n.max(2) - 1) as f64).exp() - 1.0)
            .collect();
        v[0] = t0;
        *v.last_mut().expect("nonempty") = t_end;
        v
    }
}
