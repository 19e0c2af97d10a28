use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::gas::GasModel;
use crate::quadrature::QuadPolicy;

use super::{fd_hessian, psi_hessian_det, PhaseState, PsiFunctional};

/// Relative agreement required between the closed form and the difference Hessian.
pub const FORMULA_TOLERANCE: f64 = 1e-5;

/// One random draw of `(gamma, c0, c1, rho, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FormulaSample {
    pub gamma: f64,
    pub c0: f64,
    pub c1: f64,
    pub rho: f64,
    pub m: f64,
    pub closed_form: f64,
    pub finite_difference: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FormulaReport {
    pub seed: u64,
    pub samples: usize,
    pub max_rel_error: f64,
    pub worst: Option<FormulaSample>,
    pub tolerance: f64,
    pub pass: bool,
}

impl FormulaReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Compares the bracket form of `det Hess psi`, `psi = c0 A - c1 eta`, with
/// the determinant of a difference Hessian on random states. Draws are
/// `gamma in [1.05, 2]`, `c0, c1 in [0.1, 2)`, `rho in [0.1, 3)`, `|m| < 2 rho`.
pub fn hessian_formula_check(samples: usize, seed: u64) -> Result<FormulaReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<(f64, f64, f64, f64, f64)> = (0..samples)
        .map(|_| {
            let g = rng.random_range(1.05..=2.0);
            let c0 = rng.random_range(0.1..2.0);
            let c1 = rng.random_range(0.1..2.0);
            let rho = rng.random_range(0.1..3.0);
            let m = rho * rng.random_range(-2.0..2.0);
            (g, c0, c1, rho, m)
        })
        .collect();
    let results: Vec<FormulaSample> = draws
        .par_iter()
        .map(|&(g, c0, c1, rho, m)| {
            let gas = GasModel::new(g)?;
            let s = PhaseState::new(rho, m)?;
            let closed_form = psi_hessian_det(&gas, c0, c1, s)?;
            let psi = PsiFunctional::new(&gas, c0, c1, QuadPolicy::Fixed(128))?;
            let h = fd_hessian(&psi, s)?;
            let scale = 1.0 / (gas.theta() * gas.theta() * rho.powf(2.0 * gas.theta()));
            let finite_difference = h.det() * scale;
            let rel_error =
                (closed_form - finite_difference).abs() / closed_form.abs().max(f64::MIN_POSITIVE);
            Ok(FormulaSample {
                gamma: g,
                c0,
                c1,
                rho,
                m,
                closed_form,
                finite_difference,
                rel_error,
            })
        })
        .collect::<Result<_>>()?;
    let worst = results
        .iter()
        .copied()
        .fold(None, |acc: Option<FormulaSample>, s| match acc {
            Some(w) if w.rel_error >= s.rel_error => Some(w),
            _ => Some(s),
        });
    let max_rel_error = worst.map_or(0.0, |w| w.rel_error);
    Ok(FormulaReport {
        seed,
        samples,
        max_rel_error,
        worst,
        tolerance: FORMULA_TOLERANCE,
        pass: max_rel_error < FORMULA_TOLERANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_batch_passes_and_is_reproducible() {
        let a = hessian_formula_check(8, 3).unwrap();
        let b = hessian_formula_check(8, 3).unwrap();
        assert!(a.pass, "{a:?}");
        assert_eq!(a.max_rel_error, b.max_rel_error);
        assert_eq!(a.worst, b.worst);
        let c = hessian_formula_check(8, 4).unwrap();
        assert_ne!(a.worst, c.worst);
    }

    #[test]
    fn empty_batch() {
        let r = hessian_formula_check(0, 1).unwrap();
        assert!(r.pass && r.worst.is_none());
    }
}
