use crate::error::{invalid, Result};
use crate::gas::GasModel;

use super::report::{LemmaReport, PairGrid, Worst, TOL_EXACT};

/// Half-width of the window around `x = 1` where `h` is not sampled.
pub const H_SKIP: f64 = 1e-4;

/// `(x^g - 1) / ([x^g - 1 - g (x - 1)]^(1/g) (x^(g-1) - 1))`, the ratio whose
/// lower bound controls the constant of the pressure-remainder inequality.
pub fn lemma31_h(gamma: f64, x: f64) -> f64 {
    let lx = x.ln();
    let num = (gamma * lx).exp_m1();
    let inner = (num - gamma * (x - 1.0)).max(0.0);
    let den = inner.powf(1.0 / gamma) * ((gamma - 1.0) * lx).exp_m1();
    num / den
}

/// `h(0+) = (gamma - 1)^(-1/gamma)`.
pub fn lemma31_h_at_zero(gamma: f64) -> f64 {
    (gamma - 1.0).powf(-1.0 / gamma)
}

/// Value at the `rho = 0` row, `gamma / (gamma - 1)^((gamma + 1)/gamma)`.
pub fn lemma31_endpoint(gamma: f64) -> f64 {
    gamma / (gamma - 1.0).powf((gamma + 1.0) / gamma)
}

/// Minimum of `h` on the given sorted samples, refined by golden-section
/// search between the neighbours of the best sample.
fn minimize_sampled<F: Fn(f64) -> f64>(f: F, xs: &[f64]) -> (f64, f64) {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if f(x) < f(xs[best]) {
            best = i;
        }
    }
    let lo = xs[best.saturating_sub(1)];
    let hi = xs[(best + 1).min(xs.len() - 1)];
    let (mut a, mut b) = (lo, hi);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    for _ in 0..80 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    let mid = 0.5 * (a + b);
    let cands = [(f(xs[best]), xs[best]), (f(mid), mid)];
    cands
        .into_iter()
        .min_by(|p, q| p.0.total_cmp(&q.0))
        .map(|(v, x)| (x, v))
        .unwrap_or((xs[best], f(xs[best])))
}

fn log_samples(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..n).map(move |i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
}

/// Estimated constant with the minima of `h` below and above `x = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma31Constant {
    pub c: f64,
    pub h_min_below: f64,
    pub x_below: f64,
    pub h_min_above: f64,
    pub x_above: f64,
}

/// Half the minimum over the candidate set: the `rho = 0` value, the sampled
/// minima of `h` on `(0, 1)` and `(1, inf)`, `1/2`, and `h(0+)/2`.
pub fn lemma31_constant(gas: &GasModel) -> Lemma31Constant {
    let g = gas.gamma();
    let h = |x: f64| lemma31_h(g, x);
    let mut below: Vec<f64> = log_samples(1e-8, 0.5, 800).collect();
    below.extend(log_samples(H_SKIP, 0.5, 800).map(|t| 1.0 - t));
    below.sort_by(f64::total_cmp);
    let above: Vec<f64> = log_samples(H_SKIP, 1e8, 1600).map(|t| 1.0 + t).collect();
    let (x_below, h_below) = minimize_sampled(h, &below);
    let (x_above, h_above) = minimize_sampled(h, &above);
    let c = 0.5
        * [
            lemma31_endpoint(g),
            h_below,
            h_above,
            0.5,
            0.5 * lemma31_h_at_zero(g),
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Lemma31Constant {
        c,
        h_min_below: h_below,
        x_below,
        h_min_above: h_above,
        x_above,
    }
}

/// `rho^(g+1) - rb^(g+1) - (g+1) rb^g (rho - rb)`.
pub fn remainder_gp1(gamma: f64, rho: f64, rb: f64) -> f64 {
    rho.powf(gamma + 1.0) - rb.powf(gamma + 1.0) - (gamma + 1.0) * rb.powf(gamma) * (rho - rb)
}

/// `rho^g - rb^g - g rb^(g-1) (rho - rb)`, clamped at zero.
pub fn remainder_g(gamma: f64, rho: f64, rb: f64) -> f64 {
    let rbg1 = if rb == 0.0 { 0.0 } else { rb.powf(gamma - 1.0) };
    (rho.powf(gamma) - rb.powf(gamma) - gamma * rbg1 * (rho - rb)).max(0.0)
}

/// Checks the pressure-remainder inequality with the estimated constant on a
/// `(rho, rho_bar)` grid over `[0, rho_max]^2`. Margins are divided by
/// `max(1, rho_max^(gamma+1))`, the homogeneity scale of both sides.
pub fn lemma31_check(gas: &GasModel, rho_max: f64, grid: usize) -> Result<LemmaReport> {
    if !(rho_max.is_finite() && rho_max > 0.0) {
        return Err(invalid("rho_max", rho_max, "must be positive"));
    }
    let g = gas.gamma();
    let est = lemma31_constant(gas);
    let pg = PairGrid::new(rho_max, grid);
    let axis = pg.axis();
    let scale = rho_max.powf(g + 1.0).max(1.0);
    let p = (g + 1.0) / g;
    let mut worst = Worst::new();
    for &rb in &axis {
        for &rho in &axis {
            let lhs = remainder_gp1(g, rho, rb);
            let rhs = est.c * remainder_g(g, rho, rb).powf(p);
            worst.offer((lhs - rhs) / scale, &[("rho", rho), ("rho_bar", rb)]);
        }
    }
    Ok(LemmaReport::build(
        "3.1",
        &[("gamma", g), ("rho_max", rho_max)],
        pg.spec(),
        worst,
        TOL_EXACT,
        &[
            ("c", est.c),
            ("h_min_below_1", est.h_min_below),
            ("x_below_1", est.x_below),
            ("h_min_above_1", est.h_min_above),
            ("x_above_1", est.x_above),
        ],
        vec![],
    ))
}

/// `(rho^(g-1) + rb^(g-1)) (rho - rb)^2`.
pub fn lemma32_base(gamma: f64, rho: f64, rb: f64) -> f64 {
    let p = |r: f64| if r == 0.0 { 0.0 } else { r.powf(gamma - 1.0) };
    (p(rho) + p(rb)) * (rho - rb) * (rho - rb)
}

/// `(rho^g - rb^g)(rho - rb)`.
pub fn lemma32_cross(gamma: f64, rho: f64, rb: f64) -> f64 {
    (rho.powf(gamma) - rb.powf(gamma)) * (rho - rb)
}

/// Pairs closer than this relative gap are treated as diagonal when
/// estimating `d1, d2`; both ratios are 0/0 there and lose all digits.
pub const DIAGONAL_GAP: f64 = 1e-6;

/// Estimates `d1, d2` over the off-diagonal grid and checks the three
/// inequalities with them, plus `(rho^g - rb^g)(rho - rb) >= |rho - rb|^(g+1)`.
pub fn lemma32_check(gas: &GasModel, c_max: f64, grid: usize) -> Result<LemmaReport> {
    if !(c_max.is_finite() && c_max > 0.0) {
        return Err(invalid("C", c_max, "must be positive"));
    }
    let g = gas.gamma();
    let pg = PairGrid::new(c_max, grid);
    let axis = pg.axis();
    let scale = c_max.powf(g + 1.0).max(1.0);

    let (mut d1, mut d2) = (f64::INFINITY, 0.0f64);
    for &rb in &axis {
        for &rho in &axis {
            if (rho - rb).abs() <= DIAGONAL_GAP * rho.max(rb) {
                continue;
            }
            let base = lemma32_base(g, rho, rb);
            for r in [
                remainder_gp1(g, rho, rb) / base,
                lemma32_cross(g, rho, rb) / base,
            ] {
                d1 = d1.min(r);
                d2 = d2.max(r);
            }
        }
    }

    let mut worst = Worst::new();
    for &rb in &axis {
        for &rho in &axis {
            let base = lemma32_base(g, rho, rb);
            let rem = remainder_gp1(g, rho, rb);
            let cross = lemma32_cross(g, rho, rb);
            let first = cross - (rho - rb).abs().powf(g + 1.0);
            let m = [
                first,
                rem - d1 * base,
                d2 * base - rem,
                cross - d1 * base,
                d2 * base - cross,
            ]
            .into_iter()
            .fold(f64::INFINITY, f64::min);
            worst.offer(m / scale, &[("rho", rho), ("rho_bar", rb)]);
        }
    }
    Ok(LemmaReport::build(
        "3.2",
        &[("gamma", g), ("C", c_max)],
        pg.spec(),
        worst,
        TOL_EXACT,
        &[("d1", d1), ("d2", d2)],
        vec![],
    ))
}
