use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gas::GasModel;

use super::config::{Boundary, Physics, Reconstruction, SolverConfig, TimeIntegrator};
use super::state::FieldState;

/// Faces per rayon task; smaller grids run on one thread.
const FACE_CHUNK: usize = 2048;

/// Ghost cells on each side.
const GHOSTS: usize = 2;

/// Resolved solver: configuration, gas and absolute density floor.
#[derive(Debug, Clone)]
pub struct Solver {
    gas: GasModel,
    config: SolverConfig,
    floor: f64,
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

impl Solver {
    /// `reference_rho` resolves a relative floor, normally the initial maximum density.
    pub fn new(gas: GasModel, config: SolverConfig, reference_rho: f64) -> Result<Self> {
        config.validate()?;
        let floor = config.rho_floor.resolve(reference_rho);
        if !(floor > 0.0 && floor.is_finite()) {
            return Err(crate::error::invalid(
                "rho_floor",
                floor,
                "resolved floor must be positive",
            ));
        }
        Ok(Self { gas, config, floor })
    }

    pub fn gas(&self) -> &GasModel {
        &self.gas
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    fn velocity(&self, rho: f64, m: f64) -> f64 {
        if rho > self.floor {
            m / rho
        } else {
            0.0
        }
    }

    fn wave_speed(&self, rho: f64, u: f64) -> f64 {
        u.abs() + self.gas.sound_speed(rho.max(0.0))
    }

    /// `max |u| + theta rho^theta` over cells.
    pub fn max_wave_speed(&self, state: &FieldState) -> f64 {
        state
            .rho
            .iter()
            .zip(&state.m)
            .map(|(&r, &m)| self.wave_speed(r, self.velocity(r, m)))
            .fold(0.0, |a, b| {
                if b.is_nan() || a.is_nan() {
                    f64::NAN
                } else {
                    a.max(b)
                }
            })
    }

    fn physical_flux(&self, rho: f64, u: f64) -> [f64; 2] {
        if rho <= self.floor {
            return [0.0, 0.0];
        }
        let m = rho * u;
        [m, m * u + self.gas.pressure(rho)]
    }

    /// Primitive variables with ghost cells.
    fn extended(&self, rho: &[f64], m: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = rho.len();
        let idx = |k: isize| -> usize {
            match self.config.boundary {
                Boundary::Outflow => k.clamp(0, n as isize - 1) as usize,
                Boundary::Periodic => k.rem_euclid(n as isize) as usize,
            }
        };
        let mut r = Vec::with_capacity(n + 2 * GHOSTS);
        let mut u = Vec::with_capacity(n + 2 * GHOSTS);
        for k in -(GHOSTS as isize)..(n + GHOSTS) as isize {
            let i = idx(k);
            r.push(rho[i].max(0.0));
            u.push(self.velocity(rho[i], m[i]));
        }
        (r, u)
    }

    /// `-(F_{i+1/2} - F_{i-1/2}) / dx` for both components.
    fn flux_divergence(&self, rho: &[f64], m: &[f64], dx: f64) -> (Vec<f64>, Vec<f64>) {
        let n = rho.len();
        let (r, u) = self.extended(rho, m);
        let muscl = self.config.reconstruction == Reconstruction::MusclMinmod;
        let slope = |q: &[f64], k: usize| {
            if muscl {
                minmod(q[k] - q[k - 1], q[k + 1] - q[k])
            } else {
                0.0
            }
        };
        let faces: Vec<[f64; 2]> = (0..n + 1)
            .into_par_iter()
            .with_min_len(FACE_CHUNK)
            .map(|j| {
                // face j separates cells j-1 and j
                let (kl, kr) = (j + GHOSTS - 1, j + GHOSTS);
                let rl = r[kl] + 0.5 * slope(&r, kl);
                let ul = u[kl] + 0.5 * slope(&u, kl);
                let rr = r[kr] - 0.5 * slope(&r, kr);
                let ur = u[kr] - 0.5 * slope(&u, kr);
                let fl = self.physical_flux(rl, ul);
                let fr = self.physical_flux(rr, ur);
                let a = self.wave_speed(rl, ul).max(self.wave_speed(rr, ur));
                let (ml, mr) = (rl * ul, rr * ur);
                [
                    0.5 * (fl[0] + fr[0]) - 0.5 * a * (rr - rl),
                    0.5 * (fl[1] + fr[1]) - 0.5 * a * (mr - ml),
                ]
            })
            .collect();
        let mut dr = vec![0.0; n];
        let mut dm = vec![0.0; n];
        for i in 0..n {
            dr[i] = -(faces[i + 1][0] - faces[i][0]) / dx;
            dm[i] = -(faces[i + 1][1] - faces[i][1]) / dx;
        }
        (dr, dm)
    }

    /// Raises cells below the floor and zeroes their momentum. Returns the added mass.
    fn apply_floor(&self, rho: &mut [f64], m: &mut [f64], dx: f64) -> f64 {
        let mut added = 0.0;
        for (r, mm) in rho.iter_mut().zip(m.iter_mut()) {
            if *r < self.floor {
                added += (self.floor - *r) * dx;
                *r = self.floor;
                *mm = 0.0;
            }
        }
        added
    }

    fn hyperbolic(&self, state: &mut FieldState, dt: f64) {
        let dx = state.grid.dx();
        let (dr, dm) = self.flux_divergence(&state.rho, &state.m, dx);
        match self.config.integrator {
            TimeIntegrator::ForwardEuler => {
                for i in 0..state.rho.len() {
                    state.rho[i] += dt * dr[i];
                    state.m[i] += dt * dm[i];
                }
                state.clip_mass += self.apply_floor(&mut state.rho, &mut state.m, dx);
            }
            TimeIntegrator::SspRk2 => {
                let mut r1: Vec<f64> = state.rho.iter().zip(&dr).map(|(r, d)| r + dt * d).collect();
                let mut m1: Vec<f64> = state.m.iter().zip(&dm).map(|(m, d)| m + dt * d).collect();
                let clip1 = self.apply_floor(&mut r1, &mut m1, dx);
                let (dr1, dm1) = self.flux_divergence(&r1, &m1, dx);
                for i in 0..state.rho.len() {
                    state.rho[i] = 0.5 * state.rho[i] + 0.5 * (r1[i] + dt * dr1[i]);
                    state.m[i] = 0.5 * state.m[i] + 0.5 * (m1[i] + dt * dm1[i]);
                }
                state.clip_mass += 0.5 * clip1 + self.apply_floor(&mut state.rho, &mut state.m, dx);
            }
        }
    }

    fn damp(&self, state: &mut FieldState, dt: f64) {
        let factor = (-self.gas.alpha() * dt).exp();
        for m in &mut state.m {
            *m *= factor;
        }
    }

    /// CFL step size, or `f64::INFINITY` when every cell is at rest in vacuum.
    pub fn stable_dt(&self, state: &FieldState) -> Result<f64> {
        let a = self.max_wave_speed(state);
        if !a.is_finite() {
            return Err(Error::TimeStep {
                t: state.t,
                reason: format!("wave speed is {a}"),
            });
        }
        if a == 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok(self.config.cfl * state.grid.dx() / a)
    }

    /// Advances one step, never past `until`, and returns the step size.
    /// Lands on `until` exactly when the CFL step would reach it.
    pub fn step(&self, state: &mut FieldState, until: f64) -> Result<f64> {
        let remaining = until - state.t;
        let cfl_dt = self.stable_dt(state)?;
        let (dt, landing) = if cfl_dt >= remaining {
            (remaining, true)
        } else {
            (cfl_dt, false)
        };
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::TimeStep {
                t: state.t,
                reason: format!("step size {dt} (CFL {cfl_dt}, remaining {remaining})"),
            });
        }
        match self.config.physics {
            Physics::Full => {
                self.damp(state, 0.5 * dt);
                self.hyperbolic(state, dt);
                self.damp(state, 0.5 * dt);
            }
            Physics::FluxOnly => self.hyperbolic(state, dt),
            Physics::SourceOnly => self.damp(state, dt),
        }
        state.t = if landing { until } else { state.t + dt };
        self.check_finite(state)?;
        Ok(dt)
    }

    fn check_finite(&self, state: &FieldState) -> Result<()> {
        for (i, (&r, &m)) in state.rho.iter().zip(&state.m).enumerate() {
            if !(r.is_finite() && m.is_finite()) || r < 0.0 {
                return Err(Error::Blowup {
                    t: state.t,
                    cell: i,
                    rho: r,
                    m,
                });
            }
        }
        Ok(())
    }
}

/// One CFL-limited step with the floor resolved against the current maximum density.
pub fn step(state: &FieldState, config: &SolverConfig, gas: &GasModel) -> Result<FieldState> {
    let solver = Solver::new(*gas, config.clone(), state.max_rho())?;
    let mut next = state.clone();
    solver.step(&mut next, f64::INFINITY)?;
    Ok(next)
}
