//! Weak entropy pairs of the isentropic Euler system and the convex
//! functionals built from them.
//!
//! Every functional of the conserved pair `(rho, m)` implements
//! [`Functional`]. Relative quantities `F_* = F(v) - F(vbar) - grad F(vbar)(v - vbar)`
//! are formed by [`relative`].

mod formula;
mod generator;
mod kinetic;
mod powerlaw;
mod scan;

pub use formula::{hessian_formula_check, FormulaReport, FormulaSample, FORMULA_TOLERANCE};
pub use generator::{CustomGenerator, EntropyGenerator};
pub use kinetic::{chi, quadratic_constants, EntropyFunctional, EntropyModel, QOneFunctional};
pub use powerlaw::{
    d_constants, e_constant, psi_hessian_det, psi_mm, DConstants, DFunctional, EFunctional,
    PsiFunctional,
};
pub use scan::{convexity_scan, ScanGrid, ScanReport, SCAN_TOLERANCE};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gas::GasModel;

/// Conserved pair `(rho, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub rho: f64,
    pub m: f64,
}

impl PhaseState {
    pub fn new(rho: f64, m: f64) -> Result<Self> {
        if !(rho >= 0.0) || !rho.is_finite() || !m.is_finite() {
            return Err(Error::OutsideDomain {
                what: "phase space",
                rho,
                m,
            });
        }
        Ok(Self { rho, m })
    }

    pub fn is_vacuum(&self) -> bool {
        self.rho == 0.0
    }

    /// `m / rho`; errors at vacuum.
    pub fn velocity(&self) -> Result<f64> {
        if self.rho > 0.0 {
            Ok(self.m / self.rho)
        } else {
            Err(Error::OutsideDomain {
                what: "velocity",
                rho: self.rho,
                m: self.m,
            })
        }
    }
}

/// State `v` and reference `vbar`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativePair {
    pub v: PhaseState,
    pub vbar: PhaseState,
}

/// Symmetric 2x2 matrix `[[rr, rm], [rm, mm]]` in `(rho, m)` order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sym2 {
    pub rr: f64,
    pub rm: f64,
    pub mm: f64,
}

impl Sym2 {
    pub fn det(&self) -> f64 {
        self.rr * self.mm - self.rm * self.rm
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.rr + self.mm);
        let half = 0.5 * (self.rr - self.mm);
        let rad = half.hypot(self.rm);
        let (lo, hi) = (mean - rad, mean + rad);
        // the small root by cancellation is poor; recover it from the determinant
        if hi.abs() >= lo.abs() && hi != 0.0 {
            (self.det() / hi, hi)
        } else if lo != 0.0 {
            (lo, self.det() / lo)
        } else {
            (lo, hi)
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().0
    }

    pub fn spectral_norm(&self) -> f64 {
        let (a, b) = self.eigenvalues();
        a.abs().max(b.abs())
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            rr: c * self.rr,
            rm: c * self.rm,
            mm: c * self.mm,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            rr: self.rr + o.rr,
            rm: self.rm + o.rm,
            mm: self.mm + o.mm,
        }
    }
}

/// A real function of `(rho, m)` with a gradient.
pub trait Functional: Sync {
    fn name(&self) -> String;

    fn value(&self, s: PhaseState) -> Result<f64>;

    fn gradient(&self, s: PhaseState) -> Result<[f64; 2]> {
        fd_gradient(self, s)
    }

    fn hessian(&self, s: PhaseState) -> Result<Sym2> {
        fd_hessian(self, s)
    }

    /// Rough polynomial degree in the state; finite-difference steps shrink
    /// in proportion so that `|x|^p`-type integrands stay resolved.
    fn degree(&self) -> f64 {
        2.0
    }
}

/// Relative step of the finite-difference oracles, before division by the degree.
pub const FD_STEP: f64 = 1e-2;

fn fd_steps<F: Functional + ?Sized>(f: &F, s: PhaseState) -> Result<(f64, f64)> {
    if !(s.rho > 0.0) {
        return Err(Error::OutsideDomain {
            what: "finite differences",
            rho: s.rho,
            m: s.m,
        });
    }
    let e = FD_STEP / f.degree().max(1.0);
    Ok((e * s.rho, e * (s.rho + s.m.abs())))
}

fn at<F: Functional + ?Sized>(f: &F, rho: f64, m: f64) -> Result<f64> {
    f.value(PhaseState { rho, m })
}

/// Two Richardson levels over steps `h`, `2h`, `4h`: sixth order.
fn richardson<D: Fn(f64) -> Result<f64>>(d: D) -> Result<f64> {
    let (d1, d2, d4) = (d(1.0)?, d(2.0)?, d(4.0)?);
    let r1 = (4.0 * d1 - d2) / 3.0;
    let r2 = (4.0 * d2 - d4) / 3.0;
    Ok((16.0 * r1 - r2) / 15.0)
}

/// Richardson-extrapolated central differences.
pub fn fd_gradient<F: Functional + ?Sized>(f: &F, s: PhaseState) -> Result<[f64; 2]> {
    let (hr, hm) = fd_steps(f, s)?;
    let d = |h: f64, dir: (f64, f64)| -> Result<f64> {
        let p = at(f, s.rho + h * dir.0, s.m + h * dir.1)?;
        let q = at(f, s.rho - h * dir.0, s.m - h * dir.1)?;
        Ok((p - q) / (2.0 * h))
    };
    Ok([
        richardson(|k| d(k * hr, (1.0, 0.0)))?,
        richardson(|k| d(k * hm, (0.0, 1.0)))?,
    ])
}

/// Richardson-extrapolated central second differences (25 evaluations).
pub fn fd_hessian<F: Functional + ?Sized>(f: &F, s: PhaseState) -> Result<Sym2> {
    let (hr, hm) = fd_steps(f, s)?;
    let c = at(f, s.rho, s.m)?;
    let second = |h: f64, dr: f64, dm: f64| -> Result<f64> {
        let p = at(f, s.rho + h * dr, s.m + h * dm)?;
        let q = at(f, s.rho - h * dr, s.m - h * dm)?;
        Ok((p - 2.0 * c + q) / (h * h))
    };
    let mixed = |k: f64| -> Result<f64> {
        let (a, b) = (k * hr, k * hm);
        let pp = at(f, s.rho + a, s.m + b)?;
        let pm = at(f, s.rho + a, s.m - b)?;
        let mp = at(f, s.rho - a, s.m + b)?;
        let mm = at(f, s.rho - a, s.m - b)?;
        Ok((pp - pm - mp + mm) / (4.0 * a * b))
    };
    Ok(Sym2 {
        rr: richardson(|k| second(k * hr, 1.0, 0.0))?,
        mm: richardson(|k| second(k * hm, 0.0, 1.0))?,
        rm: richardson(mixed)?,
    })
}

/// `F(v) - F(vbar) - grad F(vbar) . (v - vbar)`.
pub fn relative<F: Functional + ?Sized>(f: &F, pair: &RelativePair) -> Result<f64> {
    let grad = f.gradient(pair.vbar)?;
    let lin = grad[0] * (pair.v.rho - pair.vbar.rho) + grad[1] * (pair.v.m - pair.vbar.m);
    Ok(f.value(pair.v)? - f.value(pair.vbar)? - lin)
}

/// Wraps a closure, with an optional analytic gradient.
pub struct FnFunctional<V, G = fn(PhaseState) -> Result<[f64; 2]>> {
    name: String,
    value: V,
    gradient: Option<G>,
}

impl<V> FnFunctional<V>
where
    V: Fn(PhaseState) -> Result<f64> + Sync,
{
    pub fn new(name: impl Into<String>, value: V) -> Self {
        Self {
            name: name.into(),
            value,
            gradient: None,
        }
    }
}

impl<V, G> FnFunctional<V, G>
where
    V: Fn(PhaseState) -> Result<f64> + Sync,
    G: Fn(PhaseState) -> Result<[f64; 2]> + Sync,
{
    pub fn with_gradient(name: impl Into<String>, value: V, gradient: G) -> Self {
        Self {
            name: name.into(),
            value,
            gradient: Some(gradient),
        }
    }
}

impl<V, G> Functional for FnFunctional<V, G>
where
    V: Fn(PhaseState) -> Result<f64> + Sync,
    G: Fn(PhaseState) -> Result<[f64; 2]> + Sync,
{
    fn name(&self) -> String {
        self.name.clone()
    }

    fn value(&self, s: PhaseState) -> Result<f64> {
        (self.value)(s)
    }

    fn gradient(&self, s: PhaseState) -> Result<[f64; 2]> {
        match &self.gradient {
            Some(g) => g(s),
            None => fd_gradient(self, s),
        }
    }
}

/// `p(rho)` as a functional of the pair.
pub struct PressureFunctional(pub GasModel);

impl Functional for PressureFunctional {
    fn name(&self) -> String {
        "pressure".into()
    }

    fn value(&self, s: PhaseState) -> Result<f64> {
        Ok(self.0.pressure(s.rho))
    }

    fn gradient(&self, s: PhaseState) -> Result<[f64; 2]> {
        Ok([self.0.pressure_derivative(s.rho), 0.0])
    }

    fn hessian(&self, s: PhaseState) -> Result<Sym2> {
        let g = self.0.gamma();
        let rr = if s.rho > 0.0 {
            self.0.kappa() * g * (g - 1.0) * s.rho.powf(g - 2.0)
        } else {
            0.0
        };
        Ok(Sym2 {
            rr,
            rm: 0.0,
            mm: 0.0,
        })
    }
}

/// `P_* = p(rho) - p(rhobar) - p'(rhobar)(rho - rhobar)`.
pub fn p_star(gas: &GasModel, pair: &RelativePair) -> f64 {
    let (r, rb) = (pair.v.rho, pair.vbar.rho);
    gas.pressure(r) - gas.pressure(rb) - gas.pressure_derivative(rb) * (r - rb)
}

/// `Q_* = m^2/rho - mbar^2/rhobar + (mbar/rhobar)^2 (rho - rhobar) - 2 (mbar/rhobar)(m - mbar)`.
///
/// A vacuum state with zero momentum contributes `m^2/rho = 0` and, as the
/// reference, velocity zero.
pub fn q_star(pair: &RelativePair) -> Result<f64> {
    let (v, vb) = (pair.v, pair.vbar);
    for s in [v, vb] {
        if s.rho == 0.0 && s.m != 0.0 {
            return Err(Error::VacuumMomentum { m: s.m });
        }
    }
    let kinetic = |s: PhaseState| if s.rho > 0.0 { s.m * s.m / s.rho } else { 0.0 };
    let ub = if vb.rho > 0.0 { vb.m / vb.rho } else { 0.0 };
    Ok(kinetic(v) - kinetic(vb) + ub * ub * (v.rho - vb.rho) - 2.0 * ub * (v.m - vb.m))
}
