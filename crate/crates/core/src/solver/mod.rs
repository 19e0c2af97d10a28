//! Finite-volume solver for the damped isentropic Euler equations: local
//! Lax-Friedrichs fluxes, optional MUSCL-minmod reconstruction, and Strang
//! splitting with the damping integrated exactly.

mod config;
mod init;
mod io;
mod run;
mod scheme;
mod state;

pub use config::{Boundary, Floor, Physics, Reconstruction, SolverConfig, TimeIntegrator};
pub use init::{
    covers_support, domain_for, init_from_profile, PerturbationSpec, DOMAIN_FACTOR, NEUTRALITY_TOL,
};
pub use io::{
    content_hash, read_binary, write_binary, write_csv, RunMetadata, FORMAT_VERSION, MAGIC,
};
pub use run::{run, run_with, EnergyMonitor, InvariantRegionMonitor, Observer};
pub use scheme::{step, Solver};
pub use state::{FieldState, Grid1D};
