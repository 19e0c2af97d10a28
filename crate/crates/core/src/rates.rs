//! Distances to the Barenblatt profile, decay-exponent fits and the
//! comparison against the predicted and earlier exponents.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::barenblatt::BarenblattProfile;
use crate::error::{invalid, Error, Result};
use crate::quadrature::gauss_jacobi;
use crate::solver::{FieldState, Grid1D};

/// Sub-quadrature nodes per cell in [`lp_distance`].
pub const CELL_NODES: usize = 5;
/// Relative mass mismatch tolerated by [`y_primitive`].
pub const MASS_TOL: f64 = 1e-8;
/// Fewest samples a fit window may hold.
pub const MIN_FIT_SAMPLES: usize = 8;

/// Which quantity is tracked. The `Lgamma` and `LgammaPlus1` series hold the
/// integral `int |rho - rho_bar|^p dx`, the power that carries the decay bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    L1,
    Lgamma,
    #[serde(rename = "lgamma_plus_1")]
    LgammaPlus1,
    L2OfY,
}

impl NormKind {
    pub fn label(&self) -> &'static str {
        match self {
            Self::L1 => "l1",
            Self::Lgamma => "lgamma",
            Self::LgammaPlus1 => "lgamma_plus_1",
            Self::L2OfY => "l2_of_y",
        }
    }

    /// The tracked quantity for one state.
    pub fn measure(&self, state: &FieldState, profile: &BarenblattProfile) -> Result<f64> {
        let g = profile.gas().gamma();
        match self {
            Self::L1 => lp_distance(state, profile, 1.0),
            Self::Lgamma => Ok(lp_distance(state, profile, g)?.powf(g)),
            Self::LgammaPlus1 => Ok(lp_distance(state, profile, g + 1.0)?.powf(g + 1.0)),
            Self::L2OfY => Ok(y_primitive(state, profile)?.l2_norm()),
        }
    }

    /// Exponent `sigma` in `quantity <= C (1+t)^(-sigma + eps)`, where one is proved.
    pub fn predicted_exponent(&self, gamma: f64) -> Option<f64> {
        let gp = gamma + 1.0;
        match self {
            Self::L1 if gamma > 1.0 && !(9.0 / 7.0..2.0).contains(&gamma) => {
                Some(gamma / (2.0 * gp * gp))
            }
            Self::Lgamma if gamma >= 2.0 => Some((gamma * gamma + gamma - 1.0) / (gp * gp)),
            Self::LgammaPlus1 if gamma > 1.0 && gamma < 9.0 / 7.0 => {
                Some((gamma * gamma + 2.0 * gamma) / (gp * gp))
            }
            _ => None,
        }
    }
}

/// `(sum_cells sum_k w_k |rho_i - f(x_k)|^p)^(1/p)` with a 5-point
/// Gauss-Legendre rule in every cell.
pub fn lp_distance_to<F: Fn(f64) -> f64 + Sync>(
    grid: &Grid1D,
    values: &[f64],
    reference: F,
    p: f64,
) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(invalid("p", p, "requires 1 <= p < inf"));
    }
    if values.len() != grid.n_cells() {
        return Err(invalid(
            "len",
            values.len() as f64,
            "values must match the grid",
        ));
    }
    let rule = gauss_jacobi(CELL_NODES, 0.0, 0.0)?;
    let half = 0.5 * grid.dx();
    let total: f64 = values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let c = grid.center(i);
            half * rule.apply(|z| (v - reference(c + half * z)).abs().powf(p))
        })
        .sum();
    Ok(total.powf(1.0 / p))
}

/// `|| rho - rho_bar(., t) ||_{L^p}` with `t` the state time.
pub fn lp_distance(state: &FieldState, profile: &BarenblattProfile, p: f64) -> Result<f64> {
    let t = state.t;
    lp_distance_to(&state.grid, &state.rho, |x| profile.density(x, t), p)
}

/// `y(x) = -int_{-inf}^x (rho - rho_bar)` at the cell edges.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YField {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl YField {
    /// Exact for the piecewise-linear interpolant of the edge values.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self
            .x
            .windows(2)
            .zip(self.y.windows(2))
            .map(|(x, y)| (x[1] - x[0]) * (y[0] * y[0] + y[0] * y[1] + y[1] * y[1]) / 3.0)
            .sum();
        s.sqrt()
    }
}

/// Cumulative sum of `-(rho_i dx - int_cell rho_bar)`. The profile cell
/// integrals are exact, so `y` at the right edge is the mass difference.
pub fn y_primitive(state: &FieldState, profile: &BarenblattProfile) -> Result<YField> {
    let grid = &state.grid;
    let n = grid.n_cells();
    let dx = grid.dx();
    let cells: Vec<f64> = (0..n)
        .map(|i| {
            let bar =
                profile.integrate_against(grid.edge(i), grid.edge(i + 1), state.t, |_| 1.0)?;
            Ok(state.rho[i] * dx - bar)
        })
        .collect::<Result<_>>()?;
    let outside =
        profile.mass() - profile.integrate_against(grid.x_min(), grid.x_max(), state.t, |_| 1.0)?;
    let mut y = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    y.push(0.0);
    for c in &cells {
        acc -= c;
        y.push(acc);
    }
    let state_mass = state.mass();
    if (acc + outside).abs() > MASS_TOL * profile.mass() {
        return Err(Error::MassMismatch {
            state: state_mass,
            profile: profile.mass(),
        });
    }
    Ok(YField {
        t: state.t,
        x: (0..=n).map(|i| grid.edge(i)).collect(),
        y,
    })
}

/// Trailing fraction of the `log(1 + t)` range used in a fit, and a lower time cut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub fraction: f64,
    pub t_min: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        Self {
            fraction: 0.5,
            t_min: 10.0,
        }
    }
}

/// Least-squares fit of `log v = log C - sigma log(1 + t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// `sigma`, positive for decay.
    pub exponent: f64,
    pub prefactor: f64,
    pub r2: f64,
    /// Standard error of the slope.
    pub stderr: f64,
    pub samples: usize,
    pub t_start: f64,
    pub t_end: f64,
}

impl DecayFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.prefactor * (1.0 + t).powf(-self.exponent)
    }
}

pub fn fit_decay(times: &[f64], values: &[f64], window: FitWindow) -> Result<DecayFit> {
    if times.len() != values.len() {
        return Err(invalid(
            "values",
            values.len() as f64,
            "length must match times",
        ));
    }
    if !(window.fraction > 0.0 && window.fraction <= 1.0) {
        return Err(invalid("fraction", window.fraction, "must lie in (0, 1]"));
    }
    if let Some(&v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(invalid(
            "values",
            v,
            "must be positive and finite for a log fit",
        ));
    }
    let t_hi = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let t_lo = times.iter().copied().fold(f64::INFINITY, f64::min);
    let (l_lo, l_hi) = ((1.0 + t_lo).ln(), (1.0 + t_hi).ln());
    let cut = (l_hi - window.fraction * (l_hi - l_lo)).max((1.0 + window.t_min).ln());
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .map(|(&t, &v)| ((1.0 + t).ln(), v.ln()))
        .filter(|(l, _)| *l >= cut - 1e-12 * cut.abs())
        .collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(Error::FitWindow {
            needed: MIN_FIT_SAMPLES,
            found: pts.len(),
        });
    }
    // shifting by the first value keeps a constant series exactly flat
    let y0 = pts[0].1;
    let pts: Vec<(f64, f64)> = pts.into_iter().map(|(x, y)| (x, y - y0)).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(invalid("times", sxx, "fit window needs distinct times"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let stderr = if pts.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let exponent = if slope == 0.0 { 0.0 } else { -slope };
    Ok(DecayFit {
        exponent,
        prefactor: (intercept + y0).exp(),
        r2,
        stderr,
        samples: pts.len(),
        t_start: cut.exp() - 1.0,
        t_end: t_hi,
    })
}

/// An earlier decay exponent for the `L^1` distance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriorRate {
    pub label: &'static str,
    pub exponent: f64,
    /// Whether the earlier result covers this `gamma`.
    pub applies: bool,
}

/// `1/(gamma+1)^2` for `gamma >= 2` and `1/(4(gamma+1))` for `1 < gamma < 3`.
pub fn prior_exponents(gamma: f64) -> Vec<PriorRate> {
    let gp = gamma + 1.0;
    vec![
        PriorRate {
            label: "1/(gamma+1)^2",
            exponent: 1.0 / (gp * gp),
            applies: gamma >= 2.0,
        },
        PriorRate {
            label: "1/(4(gamma+1))",
            exponent: 1.0 / (4.0 * gp),
            applies: gamma > 1.0 && gamma < 3.0,
        },
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    pub gamma: f64,
    pub norm: NormKind,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub window: FitWindow,
    pub fit: Option<DecayFit>,
    pub fit_error: Option<String>,
    pub predicted: Option<f64>,
    pub prior: Vec<PriorRate>,
}

impl RateReport {
    pub fn new(
        gamma: f64,
        norm: NormKind,
        times: Vec<f64>,
        values: Vec<f64>,
        window: FitWindow,
    ) -> Self {
        let (fit, fit_error) = match fit_decay(&times, &values, window) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let prior = if norm == NormKind::L1 {
            prior_exponents(gamma)
        } else {
            Vec::new()
        };
        Self {
            gamma,
            norm,
            times,
            values,
            window,
            fit,
            fit_error,
            predicted: norm.predicted_exponent(gamma),
            prior,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Rows `t,norm,fitted,predicted_guide`. The guide has the predicted slope
    /// and meets the fitted curve at the start of the window.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,norm,fitted,predicted_guide")?;
        for (&t, &v) in self.times.iter().zip(&self.values) {
            let fitted = self.fit.map(|f| f.eval(t));
            let guide = match (self.fit, self.predicted) {
                (Some(f), Some(p)) => {
                    Some(f.eval(f.t_start) * ((1.0 + t) / (1.0 + f.t_start)).powf(-p))
                }
                _ => None,
            };
            let cell = |o: Option<f64>| o.map(|x| format!("{x:e}")).unwrap_or_default();
            writeln!(out, "{t:e},{v:e},{},{}", cell(fitted), cell(guide))?;
        }
        Ok(())
    }
}

/// Ordering of two exponents, with equality up to rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Greater,
    Equal,
    Less,
}

fn relation(a: f64, b: f64) -> Relation {
    if (a - b).abs() <= 1e-14 * a.abs().max(b.abs()) {
        Relation::Equal
    } else if a > b {
        Relation::Greater
    } else {
        Relation::Less
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PriorVerdict {
    pub label: &'static str,
    pub exponent: f64,
    pub applies: bool,
    /// Predicted exponent compared with this one.
    pub predicted_vs_prior: Option<Relation>,
    pub fitted_exceeds: bool,
}

/// One-sided comparison: a measured decay faster than predicted never fails.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub norm: NormKind,
    pub gamma: f64,
    pub fitted: Option<f64>,
    pub predicted: Option<f64>,
    pub epsilon: f64,
    pub fit_margin: f64,
    /// `fitted - (predicted - epsilon - fit_margin)`.
    pub slack: Option<f64>,
    pub pass: bool,
    pub prior: Vec<PriorVerdict>,
}

/// PASS iff `fitted >= predicted - epsilon - fit_margin`. Without a predicted
/// exponent the check is that the fitted exponent is positive.
pub fn theorem_comparison(report: &RateReport, epsilon: f64, fit_margin: f64) -> Verdict {
    let fitted = report.fit.map(|f| f.exponent);
    let threshold = report.predicted.map(|p| p - epsilon - fit_margin);
    let slack = match (fitted, threshold) {
        (Some(f), Some(th)) => Some(f - th),
        (Some(f), None) => Some(f),
        _ => None,
    };
    let pass = match (fitted, threshold) {
        (Some(f), Some(th)) => f >= th,
        (Some(f), None) => f > 0.0,
        _ => false,
    };
    let prior = report
        .prior
        .iter()
        .map(|p| PriorVerdict {
            label: p.label,
            exponent: p.exponent,
            applies: p.applies,
            predicted_vs_prior: report.predicted.map(|q| relation(q, p.exponent)),
            fitted_exceeds: fitted.is_some_and(|f| f > p.exponent),
        })
        .collect();
    Verdict {
        norm: report.norm,
        gamma: report.gamma,
        fitted,
        predicted: report.predicted,
        epsilon,
        fit_margin,
        slack,
        pass,
        prior,
    }
}

/// Evaluates every norm on every snapshot, in parallel across snapshots.
pub fn measure(
    snapshots: &[FieldState],
    profile: &BarenblattProfile,
    norms: &[NormKind],
    window: FitWindow,
) -> Result<Vec<RateReport>> {
    let rows: Vec<Vec<f64>> = snapshots
        .par_iter()
        .map(|s| {
            norms
                .iter()
                .map(|k| k.measure(s, profile))
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    let times: Vec<f64> = snapshots.iter().map(|s| s.t).collect();
    let gamma = profile.gas().gamma();
    Ok(norms
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            let vals = rows.iter().map(|r| r[j]).collect();
            RateReport::new(gamma, k, times.clone(), vals, window)
        })
        .collect())
}
