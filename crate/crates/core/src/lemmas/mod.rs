//! Numerical checks of the standalone inequalities: the pressure-remainder
//! bounds, the appendix lemmas, and the determinant bridge behind the
//! convexity of `A`.

pub mod appendix;
pub mod bridge;
pub mod density;
pub mod polynomial;
pub mod report;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gas::GasModel;

pub use appendix::{
    a2_default_grid, k_direct, k_reduced, lemma_a1_check, lemma_a1_check_seeded, lemma_a2_check,
    lemma_a4_check, lemma_a4_check_seeded, subadditivity_gap, taylor_sides,
};
pub use bridge::{bridge_default_grid, hessian_bridge_check, BRIDGE_GAMMA_MAX};
pub use density::{lemma31_check, lemma31_constant, lemma31_h, lemma32_check, Lemma31Constant};
pub use polynomial::{
    a5_case_for, brackets_direct, brackets_ibp, lemma_a5_check, A5Case, A5Polynomials, Brackets,
};
pub use report::{
    reports_to_json, GridSpec, LemmaReport, PairGrid, SideCheck, ValueGrid, TOL_EXACT, TOL_ORACLE,
    TOL_QUADRATURE,
};

/// One lemma check with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "lemma")]
pub enum LemmaJob {
    #[serde(rename = "3.1")]
    L31 {
        gamma: f64,
        rho_max: f64,
        grid: usize,
    },
    #[serde(rename = "3.2")]
    L32 { gamma: f64, c: f64, grid: usize },
    #[serde(rename = "A.1")]
    A1 { b: f64, samples: usize },
    #[serde(rename = "A.2")]
    A2 { gamma: f64 },
    #[serde(rename = "A.4")]
    A4 {
        nu: f64,
        n_order: u32,
        samples: usize,
    },
    #[serde(rename = "A.5")]
    A5 { n: f64, k: u32 },
    #[serde(rename = "5.2-bridge")]
    Bridge { gamma: f64, k: Option<u32> },
}

impl LemmaJob {
    /// Runs the check on its default grid.
    pub fn run(&self) -> Result<LemmaReport> {
        match *self {
            Self::L31 {
                gamma,
                rho_max,
                grid,
            } => lemma31_check(&GasModel::new(gamma)?, rho_max, grid),
            Self::L32 { gamma, c, grid } => lemma32_check(&GasModel::new(gamma)?, c, grid),
            Self::A1 { b, samples } => lemma_a1_check(b, samples),
            Self::A2 { gamma } => lemma_a2_check(&GasModel::new(gamma)?, &a2_default_grid()),
            Self::A4 {
                nu,
                n_order,
                samples,
            } => lemma_a4_check(nu, n_order, samples),
            Self::A5 { n, k } => lemma_a5_check(n, k, &ValueGrid::unit_interval(200)),
            Self::Bridge { gamma, k } => {
                hessian_bridge_check(&GasModel::new(gamma)?, k, &bridge_default_grid())
            }
        }
    }
}

/// The default battery: both density lemmas at two adiabatic exponents,
/// every appendix lemma, both cases of the polynomial lemma for `k = 4, 5`,
/// and the bridge below `9/7`.
pub fn default_jobs() -> Vec<LemmaJob> {
    let n = PairGrid::DEFAULT_N;
    let mut jobs = Vec::new();
    for &gamma in &[1.5, 2.0, 3.0] {
        jobs.push(LemmaJob::L31 {
            gamma,
            rho_max: 2.0,
            grid: n,
        });
        jobs.push(LemmaJob::L32 {
            gamma,
            c: 2.0,
            grid: n,
        });
    }
    for &b in &[0.25, 2.0 / 3.0, 1.0] {
        jobs.push(LemmaJob::A1 { b, samples: 10_000 });
    }
    for &gamma in &[1.1, 1.5, 2.0] {
        jobs.push(LemmaJob::A2 { gamma });
    }
    for &(nu, n_order) in &[(4.0, 2), (2.5, 2), (7.3, 6), (0.5, 0)] {
        jobs.push(LemmaJob::A4 {
            nu,
            n_order,
            samples: 2000,
        });
    }
    for &(n, k) in &[(8.0, 4), (8.5, 4), (10.0, 5), (10.5, 5)] {
        jobs.push(LemmaJob::A5 { n, k });
    }
    for &gamma in &[1.1, 1.2, 1.25] {
        jobs.push(LemmaJob::Bridge { gamma, k: None });
    }
    jobs
}

/// Runs the jobs in parallel; results keep the input order.
pub fn run_jobs(jobs: &[LemmaJob]) -> Vec<Result<LemmaReport>> {
    jobs.par_iter().map(LemmaJob::run).collect()
}
