//! Polytropic gas constants.
//!
//! The adiabatic exponent is the only free input. Everything else is derived
//! from it, so the couplings `kappa = alpha` and the kinetic exponents can
//! never drift apart.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Adiabatic exponent and the constants derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasModel {
    gamma: f64,
    theta: f64,
    lambda: f64,
    kappa: f64,
    alpha: f64,
}

impl GasModel {
    /// Builds the model for `gamma > 1`.
    pub fn new(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() || gamma <= 1.0 {
            return Err(invalid("gamma", gamma, "requires gamma > 1"));
        }
        let gm1 = gamma - 1.0;
        let kappa = gm1 * gm1 / (4.0 * gamma);
        Ok(Self {
            gamma,
            theta: 0.5 * gm1,
            lambda: (3.0 - gamma) / (2.0 * gm1),
            kappa,
            alpha: kappa,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `(gamma - 1) / 2`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `(3 - gamma) / (2 (gamma - 1))`, the exponent of the kinetic weight.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Pressure coefficient `(gamma - 1)^2 / (4 gamma)`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Friction coefficient, equal to `kappa`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `2 / (gamma - 1)`, the exponent of `g''` for the power-law generator.
    pub fn n_exponent(&self) -> f64 {
        2.0 / (self.gamma - 1.0)
    }

    /// `p(rho) = kappa rho^gamma`.
    pub fn pressure(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        self.kappa * rho.powf(self.gamma)
    }

    /// `p'(rho) = kappa gamma rho^(gamma - 1)`.
    pub fn pressure_derivative(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        self.kappa * self.gamma * rho.powf(self.gamma - 1.0)
    }

    /// `theta rho^theta`, which equals `sqrt(p'(rho))` under this normalization.
    pub fn sound_speed(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        self.theta * rho.powf(self.theta)
    }

    /// Riemann invariants `(u + rho^theta, u - rho^theta)`.
    pub fn riemann_invariants(&self, rho: f64, u: f64) -> (f64, f64) {
        let r = if rho > 0.0 { rho.powf(self.theta) } else { 0.0 };
        (u + r, u - r)
    }
}

/// Free-function form of [`GasModel::new`].
pub fn make_gas_model(gamma: f64) -> Result<GasModel> {
    GasModel::new(gamma)
}

pub fn pressure(g: &GasModel, rho: f64) -> f64 {
    g.pressure(rho)
}

pub fn sound_speed(g: &GasModel, rho: f64) -> f64 {
    g.sound_speed(rho)
}

pub fn riemann_invariants(g: &GasModel, rho: f64, u: f64) -> (f64, f64) {
    g.riemann_invariants(rho, u)
}
