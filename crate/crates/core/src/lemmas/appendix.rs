use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::gas::GasModel;
use crate::quadrature::{integrate_jacobi, integrate_weighted_adaptive, ADAPTIVE_TOL, MAX_NODES};

use super::report::{
    rel_gap, GridSpec, LemmaReport, SideCheck, ValueGrid, Worst, TOL_EXACT, TOL_ORACLE,
    TOL_QUADRATURE,
};

/// Seed of the sample streams used by the randomized checks.
pub const DEFAULT_SEED: u64 = 20_240_917;

/// Tolerance of the subadditivity check, relative to `x1^b + x2^b`.
pub const TOL_A1: f64 = 1e-14;

/// `x1^b + x2^b - (x1 + x2)^b`.
pub fn subadditivity_gap(b: f64, x1: f64, x2: f64) -> f64 {
    x1.powf(b) + x2.powf(b) - (x1 + x2).powf(b)
}

/// Subadditivity of `x^b` for `0 < b <= 1` on log-uniform pairs in
/// `[1e-3, 1e3]^2`. The claim is homogeneous of degree `b`, so margins are
/// divided by `x1^b + x2^b`.
pub fn lemma_a1_check(b: f64, samples: usize) -> Result<LemmaReport> {
    lemma_a1_check_seeded(b, samples, DEFAULT_SEED)
}

/// [`lemma_a1_check`] with an explicit seed.
pub fn lemma_a1_check_seeded(b: f64, samples: usize, seed: u64) -> Result<LemmaReport> {
    if !(b > 0.0 && b <= 1.0) {
        return Err(invalid("b", b, "must lie in (0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (1e-3f64, 1e3f64);
    let mut worst = Worst::new();
    for _ in 0..samples {
        let x1 = rng.random_range(lo.ln()..hi.ln()).exp();
        let x2 = rng.random_range(lo.ln()..hi.ln()).exp();
        let m = subadditivity_gap(b, x1, x2) / (x1.powf(b) + x2.powf(b));
        worst.offer(m, &[("x1", x1), ("x2", x2)]);
    }
    Ok(LemmaReport::build(
        "A.1",
        &[("b", b), ("samples", samples as f64)],
        GridSpec::Random {
            samples,
            seed,
            lo,
            hi,
        },
        worst,
        TOL_A1,
        &[],
        vec![],
    ))
}

fn require_a2_gamma(gas: &GasModel) -> Result<()> {
    let g = gas.gamma();
    if g > 2.0 {
        return Err(invalid("gamma", g, "must lie in (1, 2]"));
    }
    Ok(())
}

/// `int |a+z|^n (1-z^2)^(lambda+1) dz - int |a+z|^n (1-z^2)^lambda z^2 dz`
/// with `n = 2/(gamma-1)`, by adaptive quadrature split at `z = -a`.
pub fn k_direct(gas: &GasModel, a: f64) -> Result<f64> {
    let (n, lam) = (gas.n_exponent(), gas.lambda());
    let h = |z: f64| (a + z).abs().powf(n);
    let first = integrate_weighted_adaptive(h, lam + 1.0, &[-a])?;
    let second = integrate_weighted_adaptive(|z| h(z) * z * z, lam, &[-a])?;
    Ok(first - second)
}

/// `int |a+z|^n (1-z^2)^lambda dz`, the size of either term of `k`.
pub fn k_scale(gas: &GasModel, a: f64) -> Result<f64> {
    let n = gas.n_exponent();
    integrate_weighted_adaptive(|z| (a + z).abs().powf(n), gas.lambda(), &[-a])
}

fn jacobi_adaptive<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    let mut n = 64;
    let (mut prev, _) = integrate_jacobi(&f, lo, hi, alpha, beta, n)?;
    while n < MAX_NODES {
        n *= 2;
        let (cur, abs) = integrate_jacobi(&f, lo, hi, alpha, beta, n)?;
        if (cur - prev).abs() <= 1e-3 * ADAPTIVE_TOL * abs.max(f64::MIN_POSITIVE) {
            return Ok(cur);
        }
        prev = cur;
    }
    Ok(prev)
}

/// Integrated-by-parts form `(2a/(gamma+1)) int |a+z|^n/(a+z) (1-z^2)^(lambda+1) dz`,
/// evaluated after the shift `v = a + z` on `[0, 1+a]` and `[0, 1-a]` (for
/// `|a| < 1`) with the algebraic endpoint factors carried by Gauss-Jacobi
/// weights. Even in `a` by construction.
pub fn k_reduced(gas: &GasModel, a: f64) -> Result<f64> {
    let (g, n, lam) = (gas.gamma(), gas.n_exponent(), gas.lambda());
    let a = a.abs();
    if a == 0.0 {
        return Ok(0.0);
    }
    let p = lam + 1.0;
    let pref = 2.0 * a / (g + 1.0);
    if a < 1.0 {
        let up = jacobi_adaptive(|v| (1.0 - a + v).powf(p), 0.0, 1.0 + a, p, n - 1.0)?;
        let down = jacobi_adaptive(|v| (1.0 + a + v).powf(p), 0.0, 1.0 - a, p, n - 1.0)?;
        Ok(pref * (up - down))
    } else {
        let v = jacobi_adaptive(|v| v.powf(n - 1.0), a - 1.0, a + 1.0, p, p)?;
        Ok(pref * v)
    }
}

/// Evenness and nonnegativity of `k` on the grid (and at `-a`), with the
/// direct quadrature cross-checked against the reduced form.
pub fn lemma_a2_check(gas: &GasModel, a_grid: &ValueGrid) -> Result<LemmaReport> {
    require_a2_gamma(gas)?;
    let mut worst = Worst::new();
    let (mut even, mut gap, mut at_zero) = (0.0f64, 0.0f64, 0.0f64);
    for &a in a_grid.values() {
        let s = k_scale(gas, a)?;
        let kp = k_direct(gas, a)?;
        let km = k_direct(gas, -a)?;
        let kr = k_reduced(gas, a)?;
        worst.offer(kp.min(km) / s, &[("a", a)]);
        even = even.max((kp - km).abs() / s);
        // k vanishes quadratically at a = 0; below 1e-4 s the gap is measured against s
        gap = gap.max(rel_gap(kp, kr, 1e-4 * s));
        if a == 0.0 {
            at_zero = kp.abs() / s;
        }
    }
    let mut checks = vec![
        SideCheck::new("evenness", even, TOL_EXACT),
        SideCheck::new("reduced_form_gap", gap, TOL_ORACLE),
    ];
    if a_grid.values().contains(&0.0) {
        checks.push(SideCheck::new("k_at_zero", at_zero, TOL_EXACT));
    }
    Ok(LemmaReport::build(
        "A.2",
        &[("gamma", gas.gamma())],
        a_grid.spec(),
        worst,
        TOL_EXACT,
        &[],
        checks,
    ))
}

/// Default grid for the `k(a)` check: `0`, the unit-interval grid, and
/// `(1, 3]`.
pub fn a2_default_grid() -> ValueGrid {
    ValueGrid::unit_interval(200)
        .with(&[0.0])
        .with(ValueGrid::uniform(1.0, 3.0, 41).values())
}

/// `nu (nu-1) ... (nu-k+1)`.
fn falling(nu: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (nu - j as f64))
}

fn factorial(k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * j as f64)
}

/// `k`-th derivative of `|xi|^nu` away from `xi = 0`.
pub fn abs_power_derivative(nu: f64, k: u32, xi: f64) -> f64 {
    let c = falling(nu, k);
    if c == 0.0 {
        return 0.0;
    }
    let sgn = if k % 2 == 1 { xi.signum() } else { 1.0 };
    c * xi.abs().powf(nu - k as f64) * sgn
}

/// Both sides of the Taylor identity for `|xi|^nu` of order `n`:
/// `f(u+z) - sum_{j<=n} f^(j)(z) u^j / j!` and
/// `u^(n+1) int_0^1 (1-s)^n / n! f^(n+1)(s u + z) ds`, plus the size of the
/// terms on the left. The remainder integral is split where `s u + z`
/// changes sign and the singular factor is carried by a Jacobi weight.
pub fn taylor_sides(nu: f64, n: u32, u: f64, z: f64) -> Result<(f64, f64, f64)> {
    let f = |xi: f64| xi.abs().powf(nu);
    let mut lhs = f(u + z);
    let mut scale = lhs.abs();
    for j in 0..=n {
        let t = abs_power_derivative(nu, j, z) * u.powi(j as i32) / factorial(j);
        lhs -= t;
        scale += t.abs();
    }
    let c = falling(nu, n + 1) / factorial(n);
    if u == 0.0 || c == 0.0 {
        return Ok((lhs, 0.0, scale));
    }
    let e = nu - n as f64 - 1.0;
    if e <= -1.0 {
        return Err(Error::Unsupported(format!(
            "order {n} remainder of |xi|^{nu} is not integrable"
        )));
    }
    let nf = n as f64;
    // |s u + z| = |u| |s - s0|
    let s0 = -z / u;
    // s u + z has the sign of u right of s0 and the opposite sign left of it
    let odd = (n + 1) % 2 == 1;
    let sign_left = if odd { -u.signum() } else { 1.0 };
    let sign_right = if odd { u.signum() } else { 1.0 };
    let pref = c * u.powi(n as i32 + 1) * u.abs().powf(e);
    let integral = if s0 > 0.0 && s0 < 1.0 {
        let left = jacobi_adaptive(|s| (1.0 - s).powf(nf), 0.0, s0, e, 0.0)?;
        let (right, _) = integrate_jacobi(|_| 1.0, s0, 1.0, nf, e, 64)?;
        sign_left * left + sign_right * right
    } else {
        let sgn = if s0 >= 1.0 { sign_left } else { sign_right };
        sgn * graded_remainder(nf, e, s0)?
    };
    Ok((lhs, pref * integral, scale))
}

/// `int_0^1 (1-s)^n |s - s0|^e ds` for `s0` outside `(0, 1)`, on a mesh
/// graded geometrically toward the end nearest `s0`.
fn graded_remainder(n: f64, e: f64, s0: f64) -> Result<f64> {
    if s0 == 0.0 {
        let (v, _) = integrate_jacobi(|_| 1.0, 0.0, 1.0, n, e, 64)?;
        return Ok(v);
    }
    if s0 == 1.0 {
        let (v, _) = integrate_jacobi(|_| 1.0, 0.0, 1.0, n + e, 0.0, 64)?;
        return Ok(v);
    }
    let near_left = s0 < 0.0;
    let d = if near_left { -s0 } else { s0 - 1.0 };
    let mut cuts = vec![0.0];
    let mut w = d;
    while w < 1.0 {
        cuts.push(w);
        w *= 2.0;
    }
    cuts.push(1.0);
    let g = |s: f64| (1.0 - s).powf(n) * (s - s0).abs().powf(e);
    let mut total = 0.0;
    for seg in cuts.windows(2) {
        let (lo, hi) = if near_left {
            (seg[0], seg[1])
        } else {
            (1.0 - seg[1], 1.0 - seg[0])
        };
        total += if !near_left && hi == 1.0 {
            let (v, _) = integrate_jacobi(|s| (s - s0).abs().powf(e), lo, hi, n, 0.0, 48)?;
            v
        } else {
            integrate_jacobi(g, lo, hi, 0.0, 0.0, 48)?.0
        };
    }
    Ok(total)
}

/// Taylor identity with integral remainder for `|xi|^nu` at seeded samples
/// `(u, z)` in `[-2, 2]^2`. The margin is `-|LHS - RHS|` over the size of
/// the expanded terms.
pub fn lemma_a4_check(nu: f64, n_order: u32, samples: usize) -> Result<LemmaReport> {
    lemma_a4_check_seeded(nu, n_order, samples, DEFAULT_SEED)
}

/// [`lemma_a4_check`] with an explicit seed.
pub fn lemma_a4_check_seeded(
    nu: f64,
    n_order: u32,
    samples: usize,
    seed: u64,
) -> Result<LemmaReport> {
    if !(nu.is_finite() && nu >= 0.0) {
        return Err(invalid("nu", nu, "must be finite and nonnegative"));
    }
    if n_order as f64 > nu {
        return Err(invalid("n_order", n_order as f64, "must not exceed nu"));
    }
    if n_order as f64 == nu && nu.fract() == 0.0 && n_order % 2 == 1 {
        return Err(Error::Unsupported(format!(
            "|xi|^{nu} has a jump in its derivative of order {n_order}; the remainder is not a function"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = Worst::new();
    for _ in 0..samples {
        let u = rng.random_range(-2.0..2.0);
        let z = rng.random_range(-2.0..2.0);
        let (lhs, rhs, scale) = taylor_sides(nu, n_order, u, z)?;
        let m = -(lhs - rhs).abs() / scale.max(f64::MIN_POSITIVE);
        worst.offer(m, &[("u", u), ("z", z)]);
    }
    Ok(LemmaReport::build(
        "A.4",
        &[("nu", nu), ("n_order", n_order as f64)],
        GridSpec::Random {
            samples,
            seed,
            lo: -2.0,
            hi: 2.0,
        },
        worst,
        TOL_QUADRATURE,
        &[],
        vec![],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gas(g: f64) -> GasModel {
        GasModel::new(g).unwrap()
    }

    #[test]
    fn a1_examples() {
        assert!(subadditivity_gap(1.0, 0.3, 0.9).abs() < 1e-15);
        let g = subadditivity_gap(0.5, 1.0, 1.0);
        assert!((g - (2.0 - 2f64.sqrt())).abs() < 1e-15);
        assert!(lemma_a1_check(0.0, 10).is_err());
        assert!(lemma_a1_check(1.5, 10).is_err());
    }

    #[test]
    fn a1_random_pairs() {
        let r = lemma_a1_check(2.0 / 3.0, 10_000).unwrap();
        assert!(r.margin >= -1e-14, "{r:?}");
        assert!(r.pass);
        let one = lemma_a1_check(1.0, 1000).unwrap();
        assert!(one.margin.abs() < 1e-14 && one.pass);
    }

    #[test]
    fn k_vanishes_at_zero() {
        for &g in &[1.2, 1.5, 2.0] {
            let s = k_scale(&gas(g), 0.0).unwrap();
            assert!(k_direct(&gas(g), 0.0).unwrap().abs() < 1e-13 * s);
        }
    }

    #[test]
    fn k_is_even() {
        let gs = gas(1.4);
        for i in 1..=20 {
            let a = 0.1 * i as f64;
            let s = k_scale(&gs, a).unwrap();
            let d = k_direct(&gs, a).unwrap() - k_direct(&gs, -a).unwrap();
            assert!(d.abs() < 1e-12 * s, "a = {a}: {d}");
        }
    }

    #[test]
    fn k_at_one_matches_oracle() {
        let gs = gas(1.5);
        let direct = k_direct(&gs, 1.0).unwrap();
        let reduced = k_reduced(&gs, 1.0).unwrap();
        assert!(direct > 0.0);
        assert!(
            (direct - reduced).abs() < 1e-10 * direct,
            "{direct} {reduced}"
        );
    }

    #[test]
    fn k_symmetric_form() {
        // int_0^1 (|a+z|^n + |a-z|^n)(1-z^2)^lambda (1-2z^2) dz
        let gs = gas(1.25);
        let (n, lam) = (gs.n_exponent(), gs.lambda());
        for &a in &[0.3, 0.8, 1.7] {
            let (v, _) = integrate_jacobi(
                |z: f64| {
                    ((a + z).abs().powf(n) + (a - z).abs().powf(n))
                        * (1.0 + z).powf(lam)
                        * (1.0 - 2.0 * z * z)
                },
                0.0,
                1.0,
                lam,
                0.0,
                400,
            )
            .unwrap();
            let k = k_direct(&gs, a).unwrap();
            assert!(
                (v - k).abs() < 1e-8 * k_scale(&gs, a).unwrap(),
                "{a}: {v} {k}"
            );
        }
    }

    #[test]
    fn a2_default_grid_passes() {
        for &g in &[1.1, 1.5, 2.0] {
            let r = lemma_a2_check(&gas(g), &a2_default_grid()).unwrap();
            assert!(r.pass, "{r:#?}");
        }
        assert!(lemma_a2_check(&gas(2.5), &a2_default_grid()).is_err());
    }

    #[test]
    fn taylor_zeroth_order() {
        // f(u+z) - f(z) = u int_0^1 f'(s u + z) ds
        let (l, r, _) = taylor_sides(2.5, 0, 0.7, 0.4).unwrap();
        assert!((l - r).abs() < 1e-12);
        assert!((l - (1.1f64.powf(2.5) - 0.4f64.powf(2.5))).abs() < 1e-14);
    }

    #[test]
    fn taylor_nu4_order2() {
        let (l, r, _) = taylor_sides(4.0, 2, 0.3, 1.0).unwrap();
        // f''' = 24 xi, remainder u^3 int (1-s)^2/2 * 24 (s u + z) ds
        let exact = 0.3f64.powi(3) * (4.0 * 1.0 + 0.3);
        assert!((r - exact).abs() < 1e-12, "{r} {exact}");
        assert!((l - r).abs() < 1e-10);
    }

    #[test]
    fn taylor_sign_change_inside() {
        for &(nu, n, u, z) in &[
            (3.5, 2, -1.5, 0.6),
            (2.3, 2, 1.2, -0.5),
            (5.2, 5, 1.0, -0.25),
        ] {
            let (l, r, s) = taylor_sides(nu, n, u, z).unwrap();
            assert!((l - r).abs() < 1e-10 * s, "{nu} {n}: {l} {r}");
        }
    }

    #[test]
    fn taylor_near_singular_outside() {
        // sign change just outside [0, 1] on either side
        for &(u, z) in &[(1.0, 1e-7), (1.0, -1.0 - 1e-7), (-0.5, 0.5), (0.5, 0.0)] {
            let (l, r, s) = taylor_sides(2.6, 2, u, z).unwrap();
            assert!((l - r).abs() < 1e-10 * s, "{u} {z}: {l} {r}");
        }
    }

    #[test]
    fn a4_checks() {
        assert!(lemma_a4_check(2.5, 3, 10).is_err());
        assert!(lemma_a4_check(3.0, 3, 10).is_err());
        for &(nu, n) in &[(4.0, 2), (2.5, 2), (7.3, 6), (4.0, 4), (0.5, 0)] {
            let r = lemma_a4_check(nu, n, 500).unwrap();
            assert!(r.pass, "{r:#?}");
        }
    }

    proptest! {
        #[test]
        fn subadditive(b in 0.01f64..=1.0, x1 in 1e-6f64..1e6, x2 in 1e-6f64..1e6) {
            let s = x1.powf(b) + x2.powf(b);
            prop_assert!(subadditivity_gap(b, x1, x2) >= -1e-14 * s);
        }

        #[test]
        fn k_nonnegative(g in 1.05f64..2.0, a in -3.0f64..3.0) {
            let gs = gas(g);
            prop_assert!(k_direct(&gs, a).unwrap() >= -1e-12 * k_scale(&gs, a).unwrap());
        }
    }
}
