//! Barenblatt solution of `rho_t = (rho^gamma)_xx` with mass `M`, on the
//! clock where the initial Dirac mass sits at `t = -1`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::gas::GasModel;
use crate::quadrature::{beta, gauss_jacobi, integrate_weighted_adaptive};

/// Nodes per piece in [`BarenblattProfile::integrate_against`].
const PROFILE_NODES: usize = 24;

/// Self-similar profile with total mass `M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarenblattProfile {
    gas: GasModel,
    mass: f64,
    a0: f64,
    b0: f64,
}

/// One sampled point of the profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileSample {
    pub t: f64,
    pub x: f64,
    pub rho: f64,
    pub u: f64,
    pub m: f64,
}

impl BarenblattProfile {
    pub fn new(gas: GasModel, mass: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(invalid("mass", mass, "requires M > 0"));
        }
        let g = gas.gamma();
        // B0 chosen so that rho*u = -(rho^gamma)_x with u = x/((gamma+1)(1+t))
        let b0 = (g - 1.0) / (2.0 * g * (g + 1.0));
        let shape = beta(0.5, 1.0 / (g - 1.0) + 1.0)?;
        let a0 = (mass * b0.sqrt() / shape).powf(2.0 * (g - 1.0) / (g + 1.0));
        Ok(Self { gas, mass, a0, b0 })
    }

    pub fn gas(&self) -> &GasModel {
        &self.gas
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    fn gamma(&self) -> f64 {
        self.gas.gamma()
    }

    pub(crate) fn gamma_plus_one(&self) -> f64 {
        self.gas.gamma() + 1.0
    }

    /// `sqrt(A0/B0) (1+t)^(1/(gamma+1))`.
    pub fn support_radius(&self, t: f64) -> f64 {
        (self.a0 / self.b0).sqrt() * (1.0 + t).powf(1.0 / (self.gamma() + 1.0))
    }

    pub fn density(&self, x: f64, t: f64) -> f64 {
        let g = self.gamma();
        let s = 1.0 + t;
        let inner = self.a0 - self.b0 * s.powf(-2.0 / (g + 1.0)) * x * x;
        if inner <= 0.0 {
            return 0.0;
        }
        s.powf(-1.0 / (g + 1.0)) * inner.powf(1.0 / (g - 1.0))
    }

    /// `x / ((gamma+1)(1+t))` inside the support, zero outside.
    pub fn velocity(&self, x: f64, t: f64) -> f64 {
        if x.abs() >= self.support_radius(t) {
            return 0.0;
        }
        x / ((self.gamma() + 1.0) * (1.0 + t))
    }

    /// `rho_bar * u_bar`, which equals `-(rho_bar^gamma)_x`.
    pub fn momentum(&self, x: f64, t: f64) -> f64 {
        self.density(x, t) * self.velocity(x, t)
    }

    /// `u_t + u u_x = -gamma x / ((1+t)^2 (gamma+1)^2)`, an interior identity.
    pub fn acceleration_ratio(&self, x: f64, t: f64) -> Result<f64> {
        let radius = self.support_radius(t);
        if x.abs() >= radius {
            return Err(Error::OutsideSupport { x, radius });
        }
        let g = self.gamma();
        let s = 1.0 + t;
        Ok(-g * x / (s * s * (g + 1.0) * (g + 1.0)))
    }

    /// `int rho_bar dx` by Gauss–Legendre over the support.
    pub fn mass_at(&self, t: f64) -> Result<f64> {
        let r = self.support_radius(t);
        Ok(r * integrate_weighted_adaptive(|y| self.density(r * y, t), 0.0, &[])?)
    }

    /// `|| rho_bar^beta1 u_bar^beta2 ||_{L^q}` at time `t`.
    pub fn weighted_norm_estimate(&self, beta1: f64, beta2: f64, q: f64, t: f64) -> Result<f64> {
        if !(q >= 1.0 && q.is_finite()) {
            return Err(invalid("q", q, "requires 1 <= q < inf"));
        }
        if !(beta2 >= 0.0) {
            return Err(invalid("beta2", beta2, "requires beta2 >= 0"));
        }
        let ex = beta1 * q / (self.gamma() - 1.0);
        if !(ex > -1.0) {
            return Err(invalid(
                "beta1",
                beta1,
                "rho_bar^(beta1 q) is not integrable at the front",
            ));
        }
        let r = self.support_radius(t);
        let integral = integrate_weighted_adaptive(
            |y| {
                let x = r * y;
                let w = 1.0 - y * y;
                self.density(x, t).powf(beta1 * q) * self.velocity(x, t).abs().powf(beta2 * q)
                    / w.powf(ex)
            },
            ex,
            &[0.0],
        )?;
        Ok((r * integral).powf(1.0 / q))
    }

    /// `|| rho_bar^delta (R_bar / rho_bar) ||_{L^q}` at time `t`.
    pub fn r_weighted_norm(&self, delta: f64, q: f64, t: f64) -> Result<f64> {
        if !(q >= 1.0 && q.is_finite()) {
            return Err(invalid("q", q, "requires 1 <= q < inf"));
        }
        if !(delta > 0.0) {
            return Err(invalid("delta", delta, "requires delta > 0"));
        }
        let ex = delta * q / (self.gamma() - 1.0);
        let r = self.support_radius(t);
        let mut bad = None;
        let integral = integrate_weighted_adaptive(
            |y| {
                let x = r * y;
                let w = 1.0 - y * y;
                match self.acceleration_ratio(x, t) {
                    Ok(a) => self.density(x, t).powf(delta * q) * a.abs().powf(q) / w.powf(ex),
                    Err(e) => {
                        bad = Some(e);
                        0.0
                    }
                }
            },
            ex,
            &[0.0],
        )?;
        if let Some(e) = bad {
            return Err(e);
        }
        Ok((r * integral).powf(1.0 / q))
    }

    /// `int_a^b rho_bar(x, t) g(x) dx` for smooth `g`. Pieces touching the
    /// front use a Jacobi weight carrying the `(R - |x|)^(1/(gamma-1))` factor.
    pub fn integrate_against<F: Fn(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        t: f64,
        g: F,
    ) -> Result<f64> {
        let r = self.support_radius(t);
        let (lo, hi) = (a.max(-r), b.min(r));
        if !(hi > lo) {
            return Ok(0.0);
        }
        let nu = 1.0 / (self.gamma() - 1.0);
        let s = 1.0 + t;
        let c = s.powf(-1.0 / (self.gamma() + 1.0))
            * (self.b0 * s.powf(-2.0 / (self.gamma() + 1.0))).powf(nu);
        let pieces: Vec<(f64, f64)> = if lo == -r && hi == r {
            vec![(lo, 0.0), (0.0, hi)]
        } else {
            vec![(lo, hi)]
        };
        let mut total = 0.0;
        for (p, q) in pieces {
            let (left, right) = (p == -r, q == r);
            let rule = gauss_jacobi(
                PROFILE_NODES,
                if right { nu } else { 0.0 },
                if left { nu } else { 0.0 },
            )?;
            let (mid, half) = (0.5 * (p + q), 0.5 * (q - p));
            let sum = rule.apply(|z| {
                let x = mid + half * z;
                let fr = if right {
                    half.powf(nu)
                } else {
                    (r - x).max(0.0).powf(nu)
                };
                let fl = if left {
                    half.powf(nu)
                } else {
                    (r + x).max(0.0).powf(nu)
                };
                c * fr * fl * g(x)
            });
            total += half * sum;
        }
        Ok(total)
    }

    pub fn sample(&self, x: f64, t: f64) -> ProfileSample {
        ProfileSample {
            t,
            x,
            rho: self.density(x, t),
            u: self.velocity(x, t),
            m: self.momentum(x, t),
        }
    }

    /// Writes `x,rho,u,m` rows at time `t`.
    pub fn write_csv<W: Write>(&self, mut out: W, t: f64, xs: &[f64]) -> Result<()> {
        writeln!(out, "x,rho,u,m")?;
        for &x in xs {
            let s = self.sample(x, t);
            writeln!(out, "{:e},{:e},{:e},{:e}", s.x, s.rho, s.u, s.m)?;
        }
        Ok(())
    }
}

pub fn make_profile(gas: GasModel, mass: f64) -> Result<BarenblattProfile> {
    BarenblattProfile::new(gas, mass)
}
