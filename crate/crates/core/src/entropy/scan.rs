use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;

use super::{fd_hessian, relative, Functional, PhaseState, RelativePair};

/// Pass threshold on the scaled minimum eigenvalue and the scaled remainder.
pub const SCAN_TOLERANCE: f64 = 1e-9;

/// `rho` log-spaced on `[rho_min, rho_max]`, `m = c rho s` with `s` uniform on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanGrid {
    pub rho_min: f64,
    pub rho_max: f64,
    pub n_rho: usize,
    pub c: f64,
    pub n_s: usize,
}

impl Default for ScanGrid {
    fn default() -> Self {
        Self {
            rho_min: 0.05,
            rho_max: 3.0,
            n_rho: 24,
            c: 2.0,
            n_s: 25,
        }
    }
}

impl ScanGrid {
    pub fn points(&self) -> Vec<PhaseState> {
        let mut out = Vec::with_capacity(self.n_rho * self.n_s);
        let (l0, l1) = (self.rho_min.ln(), self.rho_max.ln());
        for i in 0..self.n_rho {
            let t = if self.n_rho > 1 {
                i as f64 / (self.n_rho - 1) as f64
            } else {
                0.0
            };
            let rho = (l0 + t * (l1 - l0)).exp();
            for j in 0..self.n_s {
                let s = if self.n_s > 1 {
                    -1.0 + 2.0 * j as f64 / (self.n_s - 1) as f64
                } else {
                    0.0
                };
                out.push(PhaseState {
                    rho,
                    m: self.c * rho * s,
                });
            }
        }
        out
    }
}

/// Outcome of a convexity scan.
#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub function: String,
    pub gamma: Option<f64>,
    pub grid: ScanGrid,
    pub points: usize,
    /// Smallest Hessian eigenvalue over the grid.
    pub min_eigenvalue: f64,
    /// Smallest ratio `lambda_min / |lambda_max|` over the grid.
    pub min_scaled_eigenvalue: f64,
    pub argmin: PhaseState,
    /// Smallest `F_* / (|F(v)| + |F(vbar)| + |grad F(vbar).(v - vbar)|)`.
    pub min_scaled_remainder: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ScanReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn scaled_remainder<F: Functional + ?Sized>(f: &F, pair: &RelativePair) -> Result<f64> {
    let rel = relative(f, pair)?;
    let g = f.gradient(pair.vbar)?;
    let lin = g[0] * (pair.v.rho - pair.vbar.rho) + g[1] * (pair.v.m - pair.vbar.m);
    let scale = f.value(pair.v)?.abs() + f.value(pair.vbar)?.abs() + lin.abs();
    Ok(if scale > 0.0 { rel / scale } else { rel })
}

/// Finite-difference Hessian eigenvalues over the grid, plus relative
/// remainders on pairs of grid points. Points are evaluated in parallel and
/// reduced in grid order.
pub fn convexity_scan<F: Functional + ?Sized>(
    f: &F,
    grid: &ScanGrid,
    gamma: Option<f64>,
) -> Result<ScanReport> {
    let pts = grid.points();
    let n = pts.len();
    let per_point: Vec<Result<(f64, f64, f64)>> = pts
        .par_iter()
        .enumerate()
        .map(|(i, &p)| {
            let h = fd_hessian(f, p)?;
            let lo = h.min_eigenvalue();
            let norm = h.spectral_norm();
            let scaled = if norm > 0.0 { lo / norm } else { 0.0 };
            let mut rem = f64::INFINITY;
            for j in [(i * 37 + 11) % n, (i + 1) % n] {
                let pair = RelativePair { v: pts[j], vbar: p };
                rem = rem.min(scaled_remainder(f, &pair)?);
            }
            Ok((lo, scaled, rem))
        })
        .collect();

    let mut min_eig = f64::INFINITY;
    let mut min_scaled = f64::INFINITY;
    let mut min_rem = f64::INFINITY;
    let mut argmin = pts
        .first()
        .copied()
        .unwrap_or(PhaseState { rho: 0.0, m: 0.0 });
    for (p, r) in pts.iter().zip(per_point) {
        let (lo, scaled, rem) = r?;
        min_eig = min_eig.min(lo);
        if scaled < min_scaled {
            min_scaled = scaled;
            argmin = *p;
        }
        min_rem = min_rem.min(rem);
    }
    let pass = min_scaled >= -SCAN_TOLERANCE && min_rem >= -SCAN_TOLERANCE;
    Ok(ScanReport {
        function: f.name(),
        gamma,
        grid: *grid,
        points: n,
        min_eigenvalue: min_eig,
        min_scaled_eigenvalue: min_scaled,
        argmin,
        min_scaled_remainder: min_rem,
        tolerance: SCAN_TOLERANCE,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{
        DFunctional, EFunctional, EntropyFunctional, EntropyGenerator, EntropyModel, FnFunctional,
        QOneFunctional,
    };
    use crate::gas::GasModel;
    use crate::quadrature::QuadPolicy;

    #[test]
    fn grid_includes_zero_momentum_and_ends() {
        let g = ScanGrid::default();
        let pts = g.points();
        assert_eq!(pts.len(), 600);
        assert!(pts.iter().any(|p| p.m == 0.0));
        assert!((pts[0].rho - 0.05).abs() < 1e-15);
        assert!((pts.last().unwrap().rho - 3.0).abs() < 1e-12);
        assert!(pts.iter().all(|p| p.m.abs() <= 2.0 * p.rho * (1.0 + 1e-15)));
    }

    #[test]
    fn square_of_momentum() {
        let f = FnFunctional::with_gradient(
            "m^2",
            |s: PhaseState| Ok(s.m * s.m),
            |s: PhaseState| Ok([0.0, 2.0 * s.m]),
        );
        let r = convexity_scan(&f, &ScanGrid::default(), None).unwrap();
        // the Hessian is diag(0, 2)
        assert!(r.min_eigenvalue.abs() < 1e-6);
        assert!(r.pass);
    }

    #[test]
    fn concave_function_fails() {
        let f = FnFunctional::new("-rho^2", |s: PhaseState| Ok(-s.rho * s.rho));
        let r = convexity_scan(&f, &ScanGrid::default(), None).unwrap();
        assert!(!r.pass);
        assert!(r.min_scaled_eigenvalue < -0.5);
    }

    #[test]
    fn quadratic_entropy_is_convex() {
        let gas = GasModel::new(2.0).unwrap();
        let m = EntropyModel::new(gas, EntropyGenerator::quadratic(), QuadPolicy::Fixed(64));
        let r = convexity_scan(&EntropyFunctional(m), &ScanGrid::default(), Some(2.0)).unwrap();
        assert!(r.min_scaled_eigenvalue >= -1e-10, "{r:?}");
        assert!(r.pass);
    }

    #[test]
    fn report_serializes() {
        let gas = GasModel::new(1.2).unwrap();
        let m = EntropyModel::new(
            gas,
            EntropyGenerator::power_law(&gas),
            QuadPolicy::Fixed(64),
        );
        let small = ScanGrid {
            n_rho: 4,
            n_s: 5,
            ..ScanGrid::default()
        };
        let r = convexity_scan(&QOneFunctional(m), &small, Some(1.2)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(v["function"], "A");
        assert_eq!(v["points"], 20);
        assert!(v["pass"].is_boolean());
    }

    #[test]
    fn lemma_functionals_pass_standard_grid() {
        let grid = ScanGrid::default();
        for &gv in &[1.1, 1.2, 1.25] {
            let gas = GasModel::new(gv).unwrap();
            let p = QuadPolicy::Fixed(64);
            let m = EntropyModel::new(gas, EntropyGenerator::power_law(&gas), p);
            let fs: Vec<Box<dyn Functional>> = vec![
                Box::new(EntropyFunctional(m.clone())),
                Box::new(QOneFunctional(m)),
                Box::new(DFunctional::new(&gas, p).unwrap()),
                Box::new(EFunctional::new(&gas, p).unwrap()),
            ];
            for f in &fs {
                let r = convexity_scan(f.as_ref(), &grid, Some(gv)).unwrap();
                assert!(r.pass, "{r:?}");
            }
        }
    }
}
