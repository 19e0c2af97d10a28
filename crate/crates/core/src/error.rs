use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("non-finite value encountered in {context} at {at}")]
    NonFinite { context: &'static str, at: f64 },

    #[error("vacuum state with nonzero momentum m = {m}")]
    VacuumMomentum { m: f64 },

    #[error("state outside the domain of {what}: rho = {rho}, m = {m}")]
    OutsideDomain {
        what: &'static str,
        rho: f64,
        m: f64,
    },

    #[error("evaluation at x = {x} lies outside the support (radius {radius})")]
    OutsideSupport { x: f64, radius: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("perturbation rejected: {0}")]
    Perturbation(String),

    #[error("time step failure at t = {t}: {reason}")]
    TimeStep { t: f64, reason: String },

    #[error("numerical blow-up at t = {t}, cell {cell}: rho = {rho}, m = {m}")]
    Blowup {
        t: f64,
        cell: usize,
        rho: f64,
        m: f64,
    },

    #[error("fit needs at least {needed} samples in the window, found {found}")]
    FitWindow { needed: usize, found: usize },

    #[error("mass mismatch: state {state} vs profile {profile}")]
    MassMismatch { state: f64, profile: f64 },

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason,
    }
}
