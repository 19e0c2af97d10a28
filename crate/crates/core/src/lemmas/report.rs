use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Additive tolerance for claims that are exact in real arithmetic.
pub const TOL_EXACT: f64 = 1e-12;
/// Relative tolerance for claims backed by quadrature.
pub const TOL_QUADRATURE: f64 = 1e-9;
/// Relative agreement required between two independent evaluations.
pub const TOL_ORACLE: f64 = 1e-8;

/// How the sample points of a check were generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpec {
    /// Tensor grid of a density axis with itself, see [`PairGrid`].
    Pairs { max: f64, n: usize, log_min: f64 },
    /// Explicit list of parameter values.
    Points { min: f64, max: f64, len: usize },
    /// Seeded uniform samples on `[lo, hi]` per coordinate.
    Random {
        samples: usize,
        seed: u64,
        lo: f64,
        hi: f64,
    },
}

/// Density axis: `n` uniform points on `[0, max]` merged with `n` log-spaced
/// points on `[log_min * max, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairGrid {
    pub max: f64,
    pub n: usize,
    pub log_min: f64,
}

impl PairGrid {
    pub const DEFAULT_N: usize = 300;
    pub const DEFAULT_LOG_MIN: f64 = 1e-8;

    pub fn new(max: f64, n: usize) -> Self {
        Self {
            max,
            n,
            log_min: Self::DEFAULT_LOG_MIN,
        }
    }

    pub fn axis(&self) -> Vec<f64> {
        let n = self.n.max(2);
        let mut pts: Vec<f64> = (0..n)
            .map(|i| self.max * i as f64 / (n - 1) as f64)
            .collect();
        let (l0, l1) = ((self.log_min * self.max).ln(), self.max.ln());
        pts.extend((0..n).map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp()));
        pts.push(self.max);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec::Pairs {
            max: self.max,
            n: self.n,
            log_min: self.log_min,
        }
    }
}

/// Sorted list of sample values for a one-parameter family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueGrid(pub Vec<f64>);

impl ValueGrid {
    pub fn new(mut v: Vec<f64>) -> Self {
        v.retain(|x| x.is_finite());
        v.sort_by(f64::total_cmp);
        v.dedup();
        Self(v)
    }

    /// `n` interior points `i / (n + 1)` of `(0, 1)` plus `1e-6` and `1 - 1e-6`.
    pub fn unit_interval(n: usize) -> Self {
        let mut v: Vec<f64> = (1..=n).map(|i| i as f64 / (n + 1) as f64).collect();
        v.push(1e-6);
        v.push(1.0 - 1e-6);
        Self::new(v)
    }

    /// `n` uniform points on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Self {
        let n = n.max(2);
        Self::new(
            (0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                .collect(),
        )
    }

    pub fn with(mut self, extra: &[f64]) -> Self {
        self.0.extend_from_slice(extra);
        Self::new(self.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec::Points {
            min: self.0.first().copied().unwrap_or(f64::NAN),
            max: self.0.last().copied().unwrap_or(f64::NAN),
            len: self.0.len(),
        }
    }
}

/// A secondary claim checked alongside the main margin: an identity residual
/// or an oracle disagreement, passing when `value <= bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideCheck {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl SideCheck {
    pub fn new(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            pass: value <= bound,
        }
    }
}

/// Outcome of one lemma check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma: String,
    pub params: BTreeMap<String, f64>,
    pub grid: GridSpec,
    /// Smallest scaled value of the claimed-nonnegative quantity.
    pub margin: f64,
    pub witness: BTreeMap<String, f64>,
    pub tolerance: f64,
    pub estimates: BTreeMap<String, f64>,
    pub checks: Vec<SideCheck>,
    /// `margin >= -tolerance` and every side check within its bound.
    pub pass: bool,
}

impl LemmaReport {
    pub(crate) fn build(
        lemma: &str,
        params: &[(&str, f64)],
        grid: GridSpec,
        worst: Worst,
        tolerance: f64,
        estimates: &[(&str, f64)],
        checks: Vec<SideCheck>,
    ) -> Self {
        let pass = worst.margin >= -tolerance && checks.iter().all(|c| c.pass);
        Self {
            lemma: lemma.to_string(),
            params: to_map(params),
            grid,
            margin: worst.margin,
            witness: to_map(&worst.witness),
            tolerance,
            estimates: to_map(estimates),
            checks,
            pass,
        }
    }

    pub fn margin_ok(&self) -> bool {
        self.margin >= -self.tolerance
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Header and one row: parameters, witness coordinates, margin.
    pub fn witness_csv(&self) -> String {
        let mut head: Vec<String> = self.params.keys().cloned().collect();
        head.extend(self.witness.keys().map(|k| format!("witness_{k}")));
        head.push("margin".into());
        let mut row: Vec<String> = self.params.values().map(|v| v.to_string()).collect();
        row.extend(self.witness.values().map(|v| v.to_string()));
        row.push(self.margin.to_string());
        let mut out = String::new();
        let _ = writeln!(out, "{}", head.join(","));
        let _ = writeln!(out, "{}", row.join(","));
        out
    }
}

/// JSON array of reports.
pub fn reports_to_json(reports: &[LemmaReport]) -> Result<String> {
    Ok(serde_json::to_string_pretty(reports)?)
}

fn to_map(kv: &[(&str, f64)]) -> BTreeMap<String, f64> {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Running minimum of a margin with the point where it occurred. Ties keep
/// the first point seen.
#[derive(Debug, Clone)]
pub(crate) struct Worst {
    pub margin: f64,
    pub witness: Vec<(&'static str, f64)>,
}

impl Worst {
    pub fn new() -> Self {
        Self {
            margin: f64::INFINITY,
            witness: Vec::new(),
        }
    }

    pub fn offer(&mut self, margin: f64, at: &[(&'static str, f64)]) {
        if margin < self.margin || margin.is_nan() && !self.margin.is_nan() {
            self.margin = margin;
            self.witness = at.to_vec();
        }
    }
}

/// `|a - b| / max(|a|, |b|, floor)`.
pub(crate) fn rel_gap(a: f64, b: f64, floor: f64) -> f64 {
    let s = a.abs().max(b.abs()).max(floor);
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}
