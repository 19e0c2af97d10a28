//! Gauss–Jacobi quadrature, Beta function and generalized binomials.
//!
//! Rules come from the Golub–Welsch eigenproblem of the Jacobi recurrence,
//! solved by implicit QL while tracking only the first eigenvector
//! component. Rules are cached per `(alpha, beta, n)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Error, Result};

/// Starting node count for adaptive integration.
pub const DEFAULT_NODES: usize = 64;
/// Upper bound on nodes per subinterval for adaptive integration.
pub const MAX_NODES: usize = 1024;
/// Agreement required between successive doublings.
pub const ADAPTIVE_TOL: f64 = 1e-11;

/// How many nodes to spend on each smooth subinterval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum QuadPolicy {
    /// A fixed count. Smooth in the integrand parameters, which finite
    /// difference oracles rely on.
    Fixed(usize),
    /// Start at [`DEFAULT_NODES`] and double until two values agree.
    #[default]
    Adaptive,
}

/// Gauss–Jacobi rule on `[-1, 1]` for the weight `(1 - x)^alpha (1 + x)^beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussJacobi {
    alpha: f64,
    beta: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussJacobi {
    pub fn new(n: usize, alpha: f64, beta: f64) -> Result<Self> {
        if n < 1 {
            return Err(invalid("n", n as f64, "need at least one node"));
        }
        if !(alpha.is_finite() && alpha > -1.0) {
            return Err(invalid("alpha", alpha, "weight exponent must exceed -1"));
        }
        if !(beta.is_finite() && beta > -1.0) {
            return Err(invalid("beta", beta, "weight exponent must exceed -1"));
        }
        if alpha > beta {
            // mirror image keeps the (a, b) and (b, a) rules exactly reflected
            let base = Self::new(n, beta, alpha)?;
            return Ok(Self {
                alpha,
                beta,
                nodes: base.nodes.iter().rev().map(|x| -x).collect(),
                weights: base.weights.iter().rev().copied().collect(),
            });
        }

        let ab = alpha + beta;
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n];
        diag[0] = (beta - alpha) / (ab + 2.0);
        for k in 1..n {
            let kf = k as f64;
            let s = 2.0 * kf + ab;
            diag[k] = (beta * beta - alpha * alpha) / (s * (s + 2.0));
            let b2 = if k == 1 {
                4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            off[k - 1] = b2.sqrt();
        }
        let mut first = vec![0.0; n];
        first[0] = 1.0;
        implicit_ql(&mut diag, &mut off, &mut first)?;

        let mu0 = ((ab + 1.0) * std::f64::consts::LN_2
            + ln_beta_unchecked(alpha + 1.0, beta + 1.0))
        .exp();
        let mut pairs: Vec<(f64, f64)> = diag
            .into_iter()
            .zip(first.into_iter().map(|v| mu0 * v * v))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (mut nodes, mut weights): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();

        if alpha == beta {
            for i in 0..n / 2 {
                let j = n - 1 - i;
                let x = 0.5 * (nodes[j] - nodes[i]);
                let w = 0.5 * (weights[i] + weights[j]);
                nodes[i] = -x;
                nodes[j] = x;
                weights[i] = w;
                weights[j] = w;
            }
            if n % 2 == 1 {
                nodes[n / 2] = 0.0;
            }
        }
        Ok(Self {
            alpha,
            beta,
            nodes,
            weights,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `sum w_i f(x_i)` on the reference interval.
    pub fn apply<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Eigenvalues of a symmetric tridiagonal matrix plus the first component of
/// each normalized eigenvector. `off[i]` couples rows `i` and `i + 1`.
fn implicit_ql(d: &mut [f64], e: &mut [f64], z: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Unsupported(
                    "tridiagonal QL iteration did not converge".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let fz = z[i + 1];
                z[i + 1] = s * z[i] + c * fz;
                z[i] = c * z[i] - s * fz;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

type RuleKey = (u64, u64, usize);

fn rule_cache() -> &'static Mutex<HashMap<RuleKey, Arc<GaussJacobi>>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<GaussJacobi>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Cached [`GaussJacobi::new`].
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<Arc<GaussJacobi>> {
    let key = (alpha.to_bits(), beta.to_bits(), n);
    if let Some(rule) = rule_cache().lock().expect("rule cache poisoned").get(&key) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(GaussJacobi::new(n, alpha, beta)?);
    rule_cache()
        .lock()
        .expect("rule cache poisoned")
        .insert(key, Arc::clone(&rule));
    Ok(rule)
}

/// Symmetric rule for the weight `(1 - z^2)^lambda` on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct JacobiRule {
    lambda: f64,
    rule: Arc<GaussJacobi>,
}

impl JacobiRule {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn nodes(&self) -> &[f64] {
        self.rule.nodes()
    }

    pub fn weights(&self) -> &[f64] {
        self.rule.weights()
    }

    /// `sum w_i f(z_i)`, approximating `int f(z) (1 - z^2)^lambda dz`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, f: F) -> f64 {
        self.rule.apply(f)
    }
}

pub fn jacobi_rule(lambda: f64, n: usize) -> Result<JacobiRule> {
    if n < 2 {
        return Err(invalid("n", n as f64, "need at least two nodes"));
    }
    if !(lambda.is_finite() && lambda > -1.0) {
        return Err(invalid(
            "lambda",
            lambda,
            "weight diverges for lambda <= -1",
        ));
    }
    Ok(JacobiRule {
        lambda,
        rule: gauss_jacobi(n, lambda, lambda)?,
    })
}

/// `int_a^b f(x) (b - x)^alpha (x - a)^beta dx` with an `n`-point rule.
/// Returns the value and the same sum taken over `|f|`.
pub fn integrate_jacobi<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    alpha: f64,
    beta: f64,
    n: usize,
) -> Result<(f64, f64)> {
    let rule = gauss_jacobi(n, alpha, beta)?;
    let half = 0.5 * (b - a);
    let scale = half.powf(alpha + beta + 1.0);
    let mut sum = 0.0;
    let mut abs = 0.0;
    for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
        let x = a + (t + 1.0) * half;
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                context: "integrand",
                at: x,
            });
        }
        sum += w * v;
        abs += w * v.abs();
    }
    Ok((scale * sum, scale * abs))
}

fn breakpoints(kinks: &[f64]) -> Vec<f64> {
    let mut pts: Vec<f64> = kinks
        .iter()
        .copied()
        .filter(|k| k.is_finite() && *k > -1.0 && *k < 1.0)
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut out = Vec::with_capacity(pts.len() + 2);
    out.push(-1.0);
    out.extend(pts);
    out.push(1.0);
    out
}

fn weighted_pass<F: FnMut(f64) -> f64>(
    f: &mut F,
    lambda: f64,
    n: usize,
    pts: &[f64],
) -> Result<(f64, f64)> {
    let mut total = 0.0;
    let mut total_abs = 0.0;
    for seg in pts.windows(2) {
        let (l, r) = (seg[0], seg[1]);
        let (v, va) = if l == -1.0 && r == 1.0 {
            integrate_jacobi(&mut *f, l, r, lambda, lambda, n)?
        } else if l == -1.0 {
            integrate_jacobi(|z| f(z) * (1.0 - z).powf(lambda), l, r, 0.0, lambda, n)?
        } else if r == 1.0 {
            integrate_jacobi(|z| f(z) * (1.0 + z).powf(lambda), l, r, lambda, 0.0, n)?
        } else {
            integrate_jacobi(
                |z| f(z) * ((1.0 - z) * (1.0 + z)).powf(lambda),
                l,
                r,
                0.0,
                0.0,
                n,
            )?
        };
        total += v;
        total_abs += va;
    }
    Ok((total, total_abs))
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda > -1.0) {
        return Err(invalid(
            "lambda",
            lambda,
            "weight diverges for lambda <= -1",
        ));
    }
    Ok(())
}

/// `int_{-1}^{1} f(z) (1 - z^2)^lambda dz` using `n` nodes on every piece of
/// `[-1, 1]` cut at the given kinks.
pub fn integrate_weighted<F: FnMut(f64) -> f64>(
    mut f: F,
    lambda: f64,
    n: usize,
    kinks: &[f64],
) -> Result<f64> {
    check_lambda(lambda)?;
    let pts = breakpoints(kinks);
    Ok(weighted_pass(&mut f, lambda, n, &pts)?.0)
}

/// Like [`integrate_weighted`] but doubles the node count from
/// [`DEFAULT_NODES`] until two successive values agree to [`ADAPTIVE_TOL`]
/// relative to `int |f| w`, capped at [`MAX_NODES`].
pub fn integrate_weighted_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    lambda: f64,
    kinks: &[f64],
) -> Result<f64> {
    check_lambda(lambda)?;
    let pts = breakpoints(kinks);
    let mut n = DEFAULT_NODES;
    let (mut prev, _) = weighted_pass(&mut f, lambda, n, &pts)?;
    while n < MAX_NODES {
        n *= 2;
        let (cur, scale) = weighted_pass(&mut f, lambda, n, &pts)?;
        if (cur - prev).abs() <= ADAPTIVE_TOL * scale.max(f64::MIN_POSITIVE) {
            return Ok(cur);
        }
        prev = cur;
    }
    Ok(prev)
}

/// Dispatches on the policy.
pub fn integrate<F: FnMut(f64) -> f64>(
    policy: QuadPolicy,
    f: F,
    lambda: f64,
    kinks: &[f64],
) -> Result<f64> {
    match policy {
        QuadPolicy::Fixed(n) => integrate_weighted(f, lambda, n, kinks),
        QuadPolicy::Adaptive => integrate_weighted_adaptive(f, lambda, kinks),
    }
}

fn ln_beta_unchecked(p: f64, q: f64) -> f64 {
    ln_gamma(p) + ln_gamma(q) - ln_gamma(p + q)
}

/// `ln B(p, q)` for `p, q > 0`.
pub fn log_beta(p: f64, q: f64) -> Result<f64> {
    if !(p.is_finite() && p > 0.0) {
        return Err(invalid("p", p, "Beta needs positive arguments"));
    }
    if !(q.is_finite() && q > 0.0) {
        return Err(invalid("q", q, "Beta needs positive arguments"));
    }
    Ok(ln_beta_unchecked(p, q))
}

/// `B(p, q) = Gamma(p) Gamma(q) / Gamma(p + q)`.
pub fn beta(p: f64, q: f64) -> Result<f64> {
    Ok(log_beta(p, q)?.exp())
}

/// `n (n - 1) ... (n - k + 1) / k!`, with the empty product for `k = 0`.
pub fn gen_binom(n: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j as f64) / (j as f64 + 1.0))
}
