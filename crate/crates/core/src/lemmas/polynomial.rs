use crate::error::{invalid, Result};
use crate::quadrature::{beta, gen_binom, integrate_jacobi, integrate_weighted_adaptive};

use super::report::{
    rel_gap, LemmaReport, SideCheck, ValueGrid, Worst, TOL_EXACT, TOL_ORACLE, TOL_QUADRATURE,
};

/// Which half of `(2k-1, 2k+1]` the exponent lies in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum A5Case {
    /// `n` in `(2k-1, 2k]`.
    Lower,
    /// `n` in `(2k, 2k+1]`.
    Upper,
}

/// The three Beta-coefficient polynomials in `a` that bound the brackets
/// `h1`, `h2` from below and `h3` from above, with
/// `f(a) = P1(a) P2(a) - P3(a)^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct A5Polynomials {
    pub n: f64,
    pub k: u32,
    pub case: A5Case,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
    pub p3: Vec<f64>,
}

/// `B((n+1)/2, (n-2j+1)/2)`.
fn b_coef(n: f64, j: u32) -> Result<f64> {
    beta(0.5 * (n + 1.0), 0.5 * (n - 2.0 * j as f64 + 1.0))
}

fn conv(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn horner(c: &[f64], a: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &x| acc * a + x)
}

/// Case and `k` for an exponent `n > 7`: the unique `k >= 4` with
/// `n` in `(2k-1, 2k+1]`.
pub fn a5_case_for(n: f64) -> Result<(u32, A5Case)> {
    if !(n.is_finite() && n > 7.0) {
        return Err(invalid("n", n, "must exceed 7"));
    }
    let k1 = (n / 2.0).ceil() as u32;
    if n > (2 * k1 - 1) as f64 {
        Ok((k1, A5Case::Lower))
    } else {
        Ok((k1 - 1, A5Case::Upper))
    }
}

impl A5Polynomials {
    pub fn new(n: f64, k: u32) -> Result<Self> {
        if k < 4 {
            return Err(invalid("k", k as f64, "must be at least 4"));
        }
        let kf = k as f64;
        let case = if n > 2.0 * kf - 1.0 && n <= 2.0 * kf {
            A5Case::Lower
        } else if n > 2.0 * kf && n <= 2.0 * kf + 1.0 {
            A5Case::Upper
        } else {
            return Err(invalid("n", n, "must lie in (2k-1, 2k+1]"));
        };
        let top = match case {
            A5Case::Lower => k - 1,
            A5Case::Upper => k,
        };
        let deg = 2 * top as usize + 2;
        let (mut p1, mut p2, mut p3) = (vec![0.0; deg], vec![0.0; deg], vec![0.0; deg]);
        for j in 0..=top {
            let b = b_coef(n, j)?;
            let i = 2 * j as usize;
            p1[i] = (2.0 * j as f64 + 2.0) * gen_binom(n, 2 * j) * b;
            p2[i] = 2.0 * j as f64 * gen_binom(n, 2 * j) * b;
        }
        for j in 0..=k - 2 {
            let b = b_coef(n, j)?;
            p3[2 * j as usize + 1] = (2.0 * j as f64 + 2.0) * gen_binom(n, 2 * j + 1) * b;
        }
        match case {
            A5Case::Lower => {
                // j = k-1 term replaced by (n+3) C(n, 2k-1) B((n+1)/2, (n-2k+3)/2)
                p3[2 * k as usize - 1] = (n + 3.0) * gen_binom(n, 2 * k - 1) * b_coef(n, k - 1)?;
            }
            A5Case::Upper => {
                let b = b_coef(n, k - 1)?;
                p3[2 * k as usize - 1] = 2.0 * kf * gen_binom(n, 2 * k - 1) * b;
                p3[2 * k as usize] = (n + 3.0) * gen_binom(n, 2 * k) * b_coef(n, k)?;
            }
        }
        Ok(Self {
            n,
            k,
            case,
            p1,
            p2,
            p3,
        })
    }

    /// `(P1(a), P2(a), P3(a))`.
    pub fn eval(&self, a: f64) -> (f64, f64, f64) {
        (
            horner(&self.p1, a),
            horner(&self.p2, a),
            horner(&self.p3, a),
        )
    }

    pub fn f(&self, a: f64) -> f64 {
        let (p1, p2, p3) = self.eval(a);
        p1 * p2 - p3 * p3
    }

    /// Coefficients of `P1 P2` and of `P3^2`.
    pub fn product_coeffs(&self) -> (Vec<f64>, Vec<f64>) {
        (conv(&self.p1, &self.p2), conv(&self.p3, &self.p3))
    }

    /// `|[a^2] f| / |[a^2] P1 P2|`.
    pub fn a2_residual(&self) -> f64 {
        let (pp, qq) = self.product_coeffs();
        (pp[2] - qq[2]).abs() / pp[2].abs()
    }
}

/// The brackets `h1, h2, h3` of the convexity determinant for
/// `h = |a+z|^n`, all multiplied by `(1+|a|)^(-n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Brackets {
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
}

impl Brackets {
    pub fn det(&self) -> f64 {
        self.h1 * self.h2 - self.h3 * self.h3
    }
}

fn lambda_of(n: f64) -> Result<f64> {
    if !(n.is_finite() && n > 1.0) {
        return Err(invalid("n", n, "must exceed 1"));
    }
    Ok(0.5 * (n - 1.0))
}

/// Scale factor applied to both bracket routes.
pub fn bracket_scale(n: f64, a: f64) -> f64 {
    (1.0 + a.abs()).powf(-n)
}

/// `h1 = (n+3) int h w - (n-1) int h z^2 w'`, `h2` with `n+1`, and
/// `h3 = (n+3) int h z w - (n-1) int h z^3 w'`, where `w = (1-z^2)^((n-1)/2)`
/// and `w' = (1-z^2)^((n-3)/2)`.
pub fn brackets_direct(n: f64, a: f64) -> Result<Brackets> {
    let lam = lambda_of(n)?;
    let sc = 1.0 + a.abs();
    let h = |z: f64| ((a + z).abs() / sc).powf(n);
    let k = [-a];
    let i0 = integrate_weighted_adaptive(h, lam, &k)?;
    let i1 = integrate_weighted_adaptive(|z| h(z) * z, lam, &k)?;
    let j2 = integrate_weighted_adaptive(|z| h(z) * z * z, lam - 1.0, &k)?;
    let j3 = integrate_weighted_adaptive(|z| h(z) * z * z * z, lam - 1.0, &k)?;
    Ok(Brackets {
        h1: (n + 3.0) * i0 - (n - 1.0) * j2,
        h2: (n + 1.0) * i0 - (n - 1.0) * j2,
        h3: (n + 3.0) * i1 - (n - 1.0) * j3,
    })
}

/// The same brackets after integrating the `w'` terms by parts:
/// `h1 = 2 int h w + a int h' w`, `h2 = a int h' w`,
/// `h3 = int h z w + a int h' z w`.
pub fn brackets_ibp(n: f64, a: f64) -> Result<Brackets> {
    let lam = lambda_of(n)?;
    let sc = 1.0 + a.abs();
    let h = |z: f64| ((a + z).abs() / sc).powf(n);
    let dh = |z: f64| n * ((a + z).abs() / sc).powf(n - 1.0) * (a + z).signum() / sc;
    let k = [-a];
    let i0 = integrate_weighted_adaptive(h, lam, &k)?;
    let i1 = integrate_weighted_adaptive(|z| h(z) * z, lam, &k)?;
    let d0 = integrate_weighted_adaptive(dh, lam, &k)?;
    let d1 = integrate_weighted_adaptive(|z| dh(z) * z, lam, &k)?;
    Ok(Brackets {
        h1: 2.0 * i0 + a * d0,
        h2: a * d0,
        h3: i1 + a * d1,
    })
}

/// Largest relative disagreement between the Beta closed forms
/// `(2j+2) B` and `2j B` and the quadrature of the moment combinations
/// `(n+3) int |z|^(n-2j) w - (n-1) int |z|^(n-2j) z^2 w'` (resp. `n+1`).
pub fn beta_coefficient_gap(n: f64, top: u32) -> Result<f64> {
    let lam = lambda_of(n)?;
    let mut gap = 0.0f64;
    for j in 0..=top {
        let m = n - 2.0 * j as f64;
        // both integrands are even; integrate over [0, 1] with z^m carried by the weight
        let (a0, _) = integrate_jacobi(|z| (1.0 + z).powf(lam), 0.0, 1.0, lam, m, 128)?;
        let (a2, _) = integrate_jacobi(
            |z| (1.0 + z).powf(lam - 1.0),
            0.0,
            1.0,
            lam - 1.0,
            m + 2.0,
            128,
        )?;
        let (a0, a2) = (2.0 * a0, 2.0 * a2);
        let b = b_coef(n, j)?;
        let jf = j as f64;
        gap = gap.max(rel_gap(
            (n + 3.0) * a0 - (n - 1.0) * a2,
            (2.0 * jf + 2.0) * b,
            0.0,
        ));
        if j > 0 {
            gap = gap.max(rel_gap((n + 1.0) * a0 - (n - 1.0) * a2, 2.0 * jf * b, 0.0));
        }
    }
    Ok(gap)
}

/// Worst violations of `h1 >= P1`, `h2 >= P2`, `h3 <= P3` and of
/// `h1 h2 - h3^2 >= f`, each relative to `h1` (resp. `h1^2`).
pub(crate) fn pathway_violation(poly: &A5Polynomials, br: &Brackets, a: f64) -> (f64, f64) {
    let s = bracket_scale(poly.n, a);
    let (p1, p2, p3) = poly.eval(a);
    let (p1, p2, p3) = (p1 * s, p2 * s, p3 * s);
    let bounds = [
        (p1 - br.h1) / br.h1,
        (p2 - br.h2) / br.h1,
        (br.h3 - p3) / br.h1,
    ]
    .into_iter()
    .fold(0.0f64, f64::max);
    let det = ((p1 * p2 - p3 * p3) - br.det()) / (br.h1 * br.h1);
    (bounds, det.max(0.0))
}

/// Nonnegativity of `f` (lower case) or `f~` (upper case) on the grid, with
/// the vanishing `a^2` coefficient, the Beta coefficients against
/// quadrature, and the quadrature determinant dominating the polynomial.
pub fn lemma_a5_check(n: f64, k: u32, a_grid: &ValueGrid) -> Result<LemmaReport> {
    let poly = A5Polynomials::new(n, k)?;
    for &a in a_grid.values() {
        if !(a > 0.0 && a < 1.0) {
            return Err(invalid("a", a, "grid must lie in (0, 1)"));
        }
    }
    let mut worst = Worst::new();
    let (mut bounds, mut dom, mut ibp) = (0.0f64, 0.0f64, 0.0f64);
    for &a in a_grid.values() {
        let (p1, p2, p3) = poly.eval(a);
        worst.offer((p1 * p2 - p3 * p3) / (p1 * p2 + p3 * p3), &[("a", a)]);
        let br = brackets_direct(n, a)?;
        let alt = brackets_ibp(n, a)?;
        ibp = ibp.max(bracket_gap(&br, &alt));
        let (b, d) = pathway_violation(&poly, &br, a);
        bounds = bounds.max(b);
        dom = dom.max(d);
    }
    let top = match poly.case {
        A5Case::Lower => k - 1,
        A5Case::Upper => k,
    };
    let mut checks = vec![
        SideCheck::new(
            "beta_vs_quadrature",
            beta_coefficient_gap(n, top)?,
            TOL_ORACLE,
        ),
        SideCheck::new("brackets_ibp_gap", ibp, TOL_ORACLE),
        SideCheck::new("bracket_bounds", bounds, TOL_QUADRATURE),
        SideCheck::new("quadrature_det_minus_f", dom, TOL_QUADRATURE),
    ];
    if poly.case == A5Case::Lower {
        checks.insert(
            0,
            SideCheck::new("a2_coefficient", poly.a2_residual(), TOL_EXACT),
        );
    }
    Ok(LemmaReport::build(
        "A.5",
        &[("n", n), ("k", k as f64)],
        a_grid.spec(),
        worst,
        TOL_QUADRATURE,
        &[("a2_coefficient", poly.a2_residual())],
        checks,
    ))
}

/// `max |x - y| / h1` over the three brackets.
pub(crate) fn bracket_gap(x: &Brackets, y: &Brackets) -> f64 {
    let s = x.h1.abs().max(y.h1.abs());
    [x.h1 - y.h1, x.h2 - y.h2, x.h3 - y.h3]
        .into_iter()
        .map(|d| d.abs() / s)
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_selection() {
        assert_eq!(a5_case_for(8.0).unwrap(), (4, A5Case::Lower));
        assert_eq!(a5_case_for(8.5).unwrap(), (4, A5Case::Upper));
        assert_eq!(a5_case_for(9.0).unwrap(), (4, A5Case::Upper));
        assert_eq!(a5_case_for(9.5).unwrap(), (5, A5Case::Lower));
        assert_eq!(a5_case_for(10.5).unwrap(), (5, A5Case::Upper));
        assert!(a5_case_for(7.0).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(A5Polynomials::new(6.0, 3).is_err());
        assert!(A5Polynomials::new(7.0, 4).is_err());
        assert!(A5Polynomials::new(9.5, 4).is_err());
        assert!(A5Polynomials::new(8.0, 4).is_ok());
        assert!(A5Polynomials::new(9.0, 4).is_ok());
    }

    #[test]
    fn a2_coefficient_vanishes() {
        for &(n, k) in &[(8.0, 4), (7.5, 4), (10.0, 5), (9.3, 5), (14.0, 7)] {
            let p = A5Polynomials::new(n, k).unwrap();
            assert!(p.a2_residual() < 1e-12, "{n} {k}: {}", p.a2_residual());
        }
    }

    #[test]
    fn a2_coefficient_by_hand() {
        // 2B(p,p) * 2 C(n,2) B(p,p-1) = (2 n B(p,p))^2, p = (n+1)/2
        let n: f64 = 8.0;
        let p = 0.5 * (n + 1.0);
        let lhs = 2.0 * beta(p, p).unwrap() * 2.0 * n * (n - 1.0) / 2.0 * beta(p, p - 1.0).unwrap();
        let rhs = (2.0 * n * beta(p, p).unwrap()).powi(2);
        assert!((lhs - rhs).abs() < 1e-12 * rhs);
    }

    #[test]
    fn polynomials_vanish_sensibly_at_zero() {
        let p = A5Polynomials::new(8.0, 4).unwrap();
        let (p1, p2, p3) = p.eval(0.0);
        assert!(p1 > 0.0);
        assert_eq!(p2, 0.0);
        assert_eq!(p3, 0.0);
        assert_eq!(p.f(0.0), 0.0);
    }

    #[test]
    fn beta_coefficients_match_quadrature() {
        for &(n, top) in &[(8.0, 3), (10.5, 5), (7.3, 3)] {
            assert!(beta_coefficient_gap(n, top).unwrap() < 1e-8);
        }
    }

    #[test]
    fn brackets_two_routes_agree() {
        for &n in &[8.0, 8.7, 10.5] {
            for &a in &[0.0, 0.3, 0.5, 0.99, 1.0, 2.0, 5.0] {
                let x = brackets_direct(n, a).unwrap();
                let y = brackets_ibp(n, a).unwrap();
                assert!(bracket_gap(&x, &y) < 1e-8, "{n} {a}: {x:?} {y:?}");
            }
        }
    }

    #[test]
    fn lower_case_value_against_quadrature() {
        let p = A5Polynomials::new(8.0, 4).unwrap();
        let a = 0.5;
        let f = p.f(a);
        assert!(f >= 0.0);
        let br = brackets_direct(8.0, a).unwrap();
        let s = bracket_scale(8.0, a);
        assert!(br.det() >= f * s * s * (1.0 - 1e-9));
        let (bounds, dom) = pathway_violation(&p, &br, a);
        assert!(bounds <= 1e-9 && dom <= 1e-9);
    }

    #[test]
    fn upper_case_on_tenths() {
        let p = A5Polynomials::new(10.5, 5).unwrap();
        for i in 1..=9 {
            let a = 0.1 * i as f64;
            let (p1, p2, p3) = p.eval(a);
            assert!(p.f(a) >= -1e-9 * (p1 * p2 + p3 * p3), "{a}");
        }
    }

    #[test]
    fn checks_pass_on_both_cases() {
        let grid = ValueGrid::unit_interval(200);
        for &(n, k) in &[(8.0, 4), (7.5, 4), (8.5, 4), (9.0, 4), (10.0, 5), (10.5, 5)] {
            let r = lemma_a5_check(n, k, &grid).unwrap();
            assert!(r.pass, "{r:#?}");
        }
    }

    #[test]
    fn grid_outside_unit_interval_rejected() {
        let g = ValueGrid::new(vec![0.5, 1.5]);
        assert!(lemma_a5_check(8.0, 4, &g).is_err());
    }
}
