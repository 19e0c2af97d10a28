use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gas::GasModel;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied generator and its derivatives.
#[derive(Clone)]
pub struct CustomGenerator {
    pub g: RealFn,
    pub g1: RealFn,
    pub g2: RealFn,
    /// Optional third derivative, needed only for the analytic Hessian of `Q1`.
    pub g3: Option<RealFn>,
    /// Point where `g''` is only continuous, if any.
    pub kink: Option<f64>,
    pub convex: bool,
}

/// The function `g` that generates a weak entropy pair.
#[derive(Clone)]
pub enum EntropyGenerator {
    /// `g = xi^2 / 2`.
    Quadratic,
    /// `g = K |xi|^p` with `p = 2 gamma/(gamma-1)` and `K` chosen so that
    /// `g'' = |xi|^(2/(gamma-1))`.
    PowerLaw {
        gamma: f64,
        k: f64,
        p: f64,
    },
    Custom(CustomGenerator),
}

impl fmt::Debug for EntropyGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Quadratic => write!(f, "Quadratic"),
            Self::PowerLaw { gamma, .. } => write!(f, "PowerLaw(gamma = {gamma})"),
            Self::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl EntropyGenerator {
    pub fn quadratic() -> Self {
        Self::Quadratic
    }

    pub fn power_law(gas: &GasModel) -> Self {
        let g = gas.gamma();
        Self::PowerLaw {
            gamma: g,
            k: (g - 1.0) * (g - 1.0) / (2.0 * g * (g + 1.0)),
            p: 2.0 * g / (g - 1.0),
        }
    }

    pub fn custom(c: CustomGenerator) -> Self {
        Self::Custom(c)
    }

    pub fn is_power_law(&self) -> bool {
        matches!(self, Self::PowerLaw { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Quadratic => "quadratic",
            Self::PowerLaw { .. } => "power-law",
            Self::Custom(_) => "custom",
        }
    }

    pub fn g(&self, xi: f64) -> f64 {
        match self {
            Self::Quadratic => 0.5 * xi * xi,
            Self::PowerLaw { k, p, .. } => k * xi.abs().powf(*p),
            Self::Custom(c) => (c.g)(xi),
        }
    }

    pub fn g1(&self, xi: f64) -> f64 {
        match self {
            Self::Quadratic => xi,
            Self::PowerLaw { k, p, .. } => k * p * xi.abs().powf(p - 1.0) * xi.signum(),
            Self::Custom(c) => (c.g1)(xi),
        }
    }

    pub fn g2(&self, xi: f64) -> f64 {
        match self {
            Self::Quadratic => 1.0,
            Self::PowerLaw { k, p, .. } => k * p * (p - 1.0) * xi.abs().powf(p - 2.0),
            Self::Custom(c) => (c.g2)(xi),
        }
    }

    pub fn g3(&self, xi: f64) -> Result<f64> {
        match self {
            Self::Quadratic => Ok(0.0),
            Self::PowerLaw { k, p, .. } => {
                if xi == 0.0 {
                    return Ok(0.0);
                }
                Ok(k * p * (p - 1.0) * (p - 2.0) * xi.abs().powf(p - 3.0) * xi.signum())
            }
            Self::Custom(c) => {
                c.g3.as_ref()
                    .map(|f| f(xi))
                    .ok_or_else(|| Error::Unsupported("custom generator without g'''".into()))
            }
        }
    }

    /// Location of the kink of `g''` in `xi`, if any.
    pub fn kink(&self) -> Option<f64> {
        match self {
            Self::Quadratic => None,
            Self::PowerLaw { .. } => Some(0.0),
            Self::Custom(c) => c.kink,
        }
    }

    pub fn is_convex(&self) -> bool {
        match self {
            Self::Quadratic | Self::PowerLaw { .. } => true,
            Self::Custom(c) => c.convex,
        }
    }

    pub(crate) fn has_g3(&self) -> bool {
        !matches!(self, Self::Custom(CustomGenerator { g3: None, .. }))
    }
}
