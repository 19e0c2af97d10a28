//! Convex combinations built on the power-law generator, for `1 < gamma <= 2`.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::gas::GasModel;
use crate::quadrature::{beta, integrate, QuadPolicy};

use super::generator::EntropyGenerator;
use super::kinetic::EntropyModel;
use super::{Functional, PhaseState, Sym2};

fn require_low_gamma(gas: &GasModel) -> Result<()> {
    let g = gas.gamma();
    if !(g > 1.0 && g <= 2.0) {
        return Err(invalid("gamma", g, "requires 1 < gamma <= 2"));
    }
    Ok(())
}

fn power_model(gas: &GasModel, policy: QuadPolicy) -> EntropyModel {
    EntropyModel::new(*gas, EntropyGenerator::power_law(gas), policy)
}

/// The three brackets `(h1, h2, h3)` whose combination `h1 h2 - h3^2` is
/// `theta^-2 rho^-2theta det Hess(c0 A - c1 eta)`, with `h1 = psi_mm`.
fn psi_brackets(gas: &GasModel, c0: f64, c1: f64, s: PhaseState) -> Result<(f64, f64, f64)> {
    require_low_gamma(gas)?;
    if !(s.rho > 0.0) {
        return Err(Error::OutsideDomain {
            what: "psi Hessian",
            rho: s.rho,
            m: s.m,
        });
    }
    let g = gas.gamma();
    let lam = gas.lambda();
    let n = gas.n_exponent();
    let a = s.m / s.rho / s.rho.powf(gas.theta());
    let kinks: Vec<f64> = if a.abs() < 1.0 { vec![-a] } else { Vec::new() };
    let h = |z: f64| (a + z).abs().powf(n);
    let p = QuadPolicy::Adaptive;
    let i0 = integrate(p, h, lam, &kinks)?;
    let i1 = integrate(p, |z| h(z) * z, lam, &kinks)?;
    let j2 = integrate(p, |z| h(z) * z * z, lam - 1.0, &kinks)?;
    let j3 = integrate(p, |z| h(z) * z * z * z, lam - 1.0, &kinks)?;
    let k = (3.0 * g - 1.0) / (g - 1.0) * c0 - c1;
    let l = (g + 1.0) / (g - 1.0) * c0 - c1;
    let t = 2.0 * lam * c0;
    Ok((k * i0 - t * j2, l * i0 - t * j2, k * i1 - t * j3))
}

/// `theta^-2 rho^-2theta (psi_rr psi_mm - psi_rm^2)` for `psi = c0 A - c1 eta`,
/// evaluated from one-dimensional moments of `|a + z|^(2/(gamma-1))` with
/// `a = u / rho^theta`.
pub fn psi_hessian_det(gas: &GasModel, c0: f64, c1: f64, s: PhaseState) -> Result<f64> {
    let (h1, h2, h3) = psi_brackets(gas, c0, c1, s)?;
    Ok(h1 * h2 - h3 * h3)
}

/// `psi_mm` for `psi = c0 A - c1 eta`.
pub fn psi_mm(gas: &GasModel, c0: f64, c1: f64, s: PhaseState) -> Result<f64> {
    Ok(psi_brackets(gas, c0, c1, s)?.0)
}

/// `psi = c0 A - c1 eta` with the power-law generator.
pub struct PsiFunctional {
    model: EntropyModel,
    c0: f64,
    c1: f64,
}

impl PsiFunctional {
    pub fn new(gas: &GasModel, c0: f64, c1: f64, policy: QuadPolicy) -> Result<Self> {
        require_low_gamma(gas)?;
        Ok(Self {
            model: power_model(gas, policy),
            c0,
            c1,
        })
    }
}

impl Functional for PsiFunctional {
    fn degree(&self) -> f64 {
        self.model.degree()
    }

    fn name(&self) -> String {
        format!("psi(c0 = {}, c1 = {})", self.c0, self.c1)
    }

    fn value(&self, s: PhaseState) -> Result<f64> {
        Ok(self.c0 * self.model.q_one(s)? - self.c1 * self.model.eta(s)?)
    }

    fn gradient(&self, s: PhaseState) -> Result<[f64; 2]> {
        let a = self.model.q_one_gradient(s)?;
        let e = self.model.gradient(s)?;
        Ok([
            self.c0 * a[0] - self.c1 * e[0],
            self.c0 * a[1] - self.c1 * e[1],
        ])
    }

    fn hessian(&self, s: PhaseState) -> Result<Sym2> {
        let a = self.model.q_one_hessian(s)?;
        let e = self.model.hessian(s)?;
        Ok(a.scale(self.c0).add(&e.scale(-self.c1)))
    }
}

/// Constants of `D = M0 A + M1 rho^(gamma+1) + M2 m^2 - B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DConstants {
    pub m0: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

/// The strict lower bounds on `M4` and `M2` are doubled.
pub fn d_constants(gas: &GasModel) -> Result<DConstants> {
    require_low_gamma(gas)?;
    let g = gas.gamma();
    let n = gas.n_exponent();
    let m3 = 2.0 * g / (g - 1.0);
    let m4 = 2.0 * m3 * 4f64.powf(n + 4.0);
    Ok(DConstants {
        m0: m3 - 1.0,
        m1: m4 / (g * (g + 1.0)),
        m2: 2.0 * m3 * 4f64.powf(n + 2.0),
        m3,
        m4,
    })
}

/// `D` as a [`Functional`].
pub struct DFunctional {
    model: EntropyModel,
    k: DConstants,
}

impl DFunctional {
    pub fn new(gas: &GasModel, policy: QuadPolicy) -> Result<Self> {
        Ok(Self {
            model: power_model(gas, policy),
            k: d_constants(gas)?,
        })
    }

    pub fn constants(&self) -> DConstants {
        self.k
    }

    fn poly(&self, s: PhaseState) -> f64 {
        let g = self.model.gas().gamma();
        self.k.m1 * s.rho.powf(g + 1.0) + self.k.m2 * s.m * s.m
    }
}

impl Functional for DFunctional {
    fn degree(&self) -> f64 {
        self.model.degree()
    }

    fn name(&self) -> String {
        "D".into()
    }

    fn value(&self, s: PhaseState) -> Result<f64> {
        if s.rho == 0.0 {
            return Ok(self.model.q_one(s)? + self.poly(s));
        }
        let (a, b) = self.model.decompose_ab(s)?;
        Ok(self.k.m0 * a + self.poly(s) - b)
    }

    // B = M3 eta - A, so D = (M0 + 1) A - M3 eta + M1 rho^(gamma+1) + M2 m^2
    fn gradient(&self, s: PhaseState) -> Result<[f64; 2]> {
        let g = self.model.gas().gamma();
        let a = self.model.q_one_gradient(s)?;
        let e = self.model.gradient(s)?;
        let c = self.k.m0 + 1.0;
        Ok([
            c * a[0] - self.k.m3 * e[0] + self.k.m1 * (g + 1.0) * s.rho.powf(g),
            c * a[1] - self.k.m3 * e[1] + 2.0 * self.k.m2 * s.m,
        ])
    }

    fn hessian(&self, s: PhaseState) -> Result<Sym2> {
        let g = self.model.gas().gamma();
        let a = self.model.q_one_hessian(s)?;
        let e = self.model.hessian(s)?;
        let poly = Sym2 {
            rr: self.k.m1 * (g + 1.0) * g * s.rho.powf(g - 1.0),
            rm: 0.0,
            mm: 2.0 * self.k.m2,
        };
        Ok(a.scale(self.k.m0 + 1.0)
            .add(&e.scale(-self.k.m3))
            .add(&poly))
    }
}

/// `C0` set to half of `theta^2 int |z|^(2/(gamma-1)) (1-z^2)^(lambda+1) dz / (gamma (gamma+1))`.
pub fn e_constant(gas: &GasModel) -> Result<f64> {
    require_low_gamma(gas)?;
    let g = gas.gamma();
    let th = gas.theta();
    let moment = beta(0.5 * (gas.n_exponent() + 1.0), gas.lambda() + 2.0)?;
    Ok(0.5 * th * th * moment / (g * (g + 1.0)))
}

/// `E = eta - C0 rho^(gamma+1)` as a [`Functional`].
pub struct EFunctional {
    model: EntropyModel,
    c0: f64,
}

impl EFunctional {
    pub fn new(gas: &GasModel, policy: QuadPolicy) -> Result<Self> {
        Ok(Self {
            model: power_model(gas, policy),
            c0: e_constant(gas)?,
        })
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }
}

impl Functional for EFunctional {
    fn degree(&self) -> f64 {
        self.model.degree()
    }

    fn name(&self) -> String {
        "E".into()
    }

    fn value(&self, s: PhaseState) -> Result<f64> {
        let g = self.model.gas().gamma();
        Ok(self.model.eta(s)? - self.c0 * s.rho.powf(g + 1.0))
    }

    fn gradient(&self, s: PhaseState) -> Result<[f64; 2]> {
        let g = self.model.gas().gamma();
        let e = self.model.gradient(s)?;
        Ok([e[0] - self.c0 * (g + 1.0) * s.rho.powf(g), e[1]])
    }

    fn hessian(&self, s: PhaseState) -> Result<Sym2> {
        let g = self.model.gas().gamma();
        let mut h = self.model.hessian(s)?;
        h.rr -= self.c0 * (g + 1.0) * g * s.rho.powf(g - 1.0);
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{fd_hessian, relative, QOneFunctional, RelativePair};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn gas(g: f64) -> GasModel {
        GasModel::new(g).unwrap()
    }

    fn st(rho: f64, m: f64) -> PhaseState {
        PhaseState::new(rho, m).unwrap()
    }

    /// `theta^-2 rho^-2theta det` from a finite-difference Hessian of psi.
    fn fd_scaled_det(g: &GasModel, c0: f64, c1: f64, s: PhaseState) -> (f64, f64) {
        let psi = PsiFunctional::new(g, c0, c1, QuadPolicy::Fixed(128)).unwrap();
        let h = fd_hessian(&psi, s).unwrap();
        let sc = 1.0 / (g.theta() * g.theta() * s.rho.powf(2.0 * g.theta()));
        (h.det() * sc, (h.rr * h.mm).abs() * sc + h.rm * h.rm * sc)
    }

    #[test]
    fn a_determinant_vanishes_at_zero_velocity() {
        for &g in &[1.1, 1.5, 2.0] {
            let d = psi_hessian_det(&gas(g), 1.0, 0.0, st(1.3, 0.0)).unwrap();
            let (h1, _, _) = psi_brackets(&gas(g), 1.0, 0.0, st(1.3, 0.0)).unwrap();
            assert!(d.abs() < 1e-12 * h1 * h1, "gamma {g}: {d}");
        }
    }

    #[test]
    fn closed_form_matches_differences_at_example() {
        let g = gas(1.25);
        let s = st(1.1, 0.5);
        let cf = psi_hessian_det(&g, 0.7, 1.3, s).unwrap();
        let (fd, _) = fd_scaled_det(&g, 0.7, 1.3, s);
        assert!((cf - fd).abs() < 1e-5 * cf.abs(), "{cf} vs {fd}");
    }

    #[test]
    fn psi_mm_matches_analytic_and_reduced_form() {
        let g = gas(1.4);
        let (c0, c1) = (0.9, 0.4);
        let s = st(0.8, -0.35);
        let psi = PsiFunctional::new(&g, c0, c1, QuadPolicy::Adaptive).unwrap();
        let an = psi.hessian(s).unwrap();
        let cf = psi_mm(&g, c0, c1, s).unwrap();
        assert!((an.mm - cf).abs() < 1e-10 * cf.abs());
        // (2 c0 - c1) int h w + (2a/(gamma-1)) c0 int h/(a+z) w
        let n = g.n_exponent();
        let a = s.m / s.rho / s.rho.powf(g.theta());
        let k = [-a];
        let i0 = integrate(
            QuadPolicy::Adaptive,
            |z| (a + z).abs().powf(n),
            g.lambda(),
            &k,
        )
        .unwrap();
        let i1 = integrate(
            QuadPolicy::Adaptive,
            |z| (a + z).abs().powf(n - 1.0) * (a + z).signum(),
            g.lambda(),
            &k,
        )
        .unwrap();
        let reduced = (2.0 * c0 - c1) * i0 + 2.0 * a / (g.gamma() - 1.0) * c0 * i1;
        assert!((reduced - cf).abs() < 1e-9 * cf.abs(), "{reduced} vs {cf}");
    }

    #[test]
    fn closed_form_matches_differences_on_random_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let gm = gas(rng.random_range(1.05..=2.0));
            let c0 = rng.random_range(0.1..2.0);
            let c1 = rng.random_range(0.1..2.0);
            let rho = rng.random_range(0.1..3.0);
            let m = rho * rng.random_range(-2.0..2.0);
            let s = st(rho, m);
            let cf = psi_hessian_det(&gm, c0, c1, s).unwrap();
            let (fd, _) = fd_scaled_det(&gm, c0, c1, s);
            assert!(
                (cf - fd).abs() < 1e-5 * cf.abs(),
                "gamma {} c0 {c0} c1 {c1} s {s:?}: {cf} vs {fd}",
                gm.gamma()
            );
        }
    }

    #[test]
    fn d_constants_at_two() {
        let k = d_constants(&gas(2.0)).unwrap();
        assert_eq!(k.m3, 4.0);
        assert_eq!(k.m0, 3.0);
        assert!(k.m4 > 4.0 * 4f64.powi(6));
        assert!(k.m2 > 4.0 * 4f64.powi(4));
        assert_eq!(k.m4, 2.0 * 16384.0);
        assert_eq!(k.m2, 2.0 * 1024.0);
        assert!((k.m1 - k.m4 / 6.0).abs() < 1e-12);
        assert!(d_constants(&gas(2.5)).is_err());
    }

    #[test]
    fn e_constant_at_two() {
        let c0 = e_constant(&gas(2.0)).unwrap();
        assert!((c0 - PI / 768.0).abs() < 1e-15);
        assert!(e_constant(&gas(2.1)).is_err());
    }

    #[test]
    fn e_bound_moment_by_quadrature() {
        // int z^2 (1-z^2)^(3/2) dz by composite Simpson
        let n = 200_000;
        let h = 2.0 / n as f64;
        let f = |z: f64| z * z * (1.0 - z * z).max(0.0).powf(1.5);
        let mut s = f(-1.0) + f(1.0);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(-1.0 + i as f64 * h);
        }
        assert!((s * h / 3.0 - PI / 16.0).abs() < 1e-9);
    }

    #[test]
    fn relative_functionals_vanish_on_diagonal() {
        let g = gas(1.25);
        let d = DFunctional::new(&g, QuadPolicy::Fixed(96)).unwrap();
        let e = EFunctional::new(&g, QuadPolicy::Fixed(96)).unwrap();
        let v = st(0.9, 0.3);
        let pair = RelativePair { v, vbar: v };
        assert!(relative(&d, &pair).unwrap().abs() < 1e-9 * d.value(v).unwrap().abs());
        assert!(relative(&e, &pair).unwrap().abs() < 1e-12);
    }

    #[test]
    fn d_and_e_hessians_vs_differences() {
        for &gv in &[1.1, 1.25, 2.0] {
            let g = gas(gv);
            let d = DFunctional::new(&g, QuadPolicy::Fixed(128)).unwrap();
            let e = EFunctional::new(&g, QuadPolicy::Fixed(128)).unwrap();
            for s in [st(0.7, 0.2), st(2.0, -3.0), st(0.1, 0.0)] {
                for f in [&d as &dyn Functional, &e] {
                    let an = f.hessian(s).unwrap();
                    let fd = fd_hessian(f, s).unwrap();
                    let sc = an.spectral_norm();
                    assert!((an.rr - fd.rr).abs() < 1e-6 * sc, "{} gamma {gv}", f.name());
                    assert!((an.rm - fd.rm).abs() < 1e-6 * sc, "{} gamma {gv}", f.name());
                    assert!((an.mm - fd.mm).abs() < 1e-6 * sc, "{} gamma {gv}", f.name());
                }
            }
        }
    }

    #[test]
    fn d_value_matches_decomposed_form() {
        let g = gas(1.2);
        let d = DFunctional::new(&g, QuadPolicy::Adaptive).unwrap();
        let k = d.constants();
        let model = power_model(&g, QuadPolicy::Adaptive);
        let s = st(1.4, -0.6);
        let a = QOneFunctional(model.clone()).value(s).unwrap();
        let eta = model.eta(s).unwrap();
        let alt = (k.m0 + 1.0) * a - k.m3 * eta + k.m1 * s.rho.powf(2.2) + k.m2 * s.m * s.m;
        assert!((alt - d.value(s).unwrap()).abs() < 1e-9 * alt.abs());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn a_determinant_nonnegative(rho in 0.05f64..3.0, c in -2.0f64..2.0) {
            let g = gas(1.2);
            let s = st(rho, c * rho);
            let (h1, h2, h3) = psi_brackets(&g, 1.0, 0.0, s).unwrap();
            prop_assert!(h1 * h2 - h3 * h3 >= -1e-10 * (h1 * h2).abs().max(h3 * h3));
            prop_assert!(h1 > 0.0);
        }

        #[test]
        fn d_and_e_relative_nonnegative(
            gv in prop::sample::select(vec![1.1, 1.2, 1.25, 1.28]),
            r in 0.05f64..3.0, rb in 0.05f64..3.0, a in -2.0f64..2.0, b in -2.0f64..2.0,
        ) {
            let g = gas(gv);
            let pair = RelativePair { v: st(r, a * r), vbar: st(rb, b * rb) };
            let d = DFunctional::new(&g, QuadPolicy::Fixed(96)).unwrap();
            let e = EFunctional::new(&g, QuadPolicy::Fixed(96)).unwrap();
            for f in [&d as &dyn Functional, &e] {
                let rel = relative(f, &pair).unwrap();
                let scale = f.value(pair.v).unwrap().abs() + f.value(pair.vbar).unwrap().abs();
                prop_assert!(rel >= -1e-9 * scale, "{} {rel}", f.name());
            }
        }
    }
}
