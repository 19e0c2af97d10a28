use crate::error::{Error, Result};
use crate::gas::GasModel;
use crate::quadrature::{beta, integrate, QuadPolicy};

use super::generator::EntropyGenerator;
use super::{Functional, PhaseState, Sym2};

fn require_kinetic(gas: &GasModel) -> Result<()> {
    if gas.gamma() >= 3.0 {
        return Err(Error::Unsupported(format!(
            "kinetic representation needs gamma < 3, got {}",
            gas.gamma()
        )));
    }
    Ok(())
}

/// `(rho^(gamma-1) - (xi - u)^2)_+^lambda`.
pub fn chi(gas: &GasModel, xi: f64, rho: f64, u: f64) -> Result<f64> {
    require_kinetic(gas)?;
    if !(rho >= 0.0) {
        return Err(Error::OutsideDomain {
            what: "chi",
            rho,
            m: f64::NAN,
        });
    }
    let base = rho.powf(gas.gamma() - 1.0) - (xi - u) * (xi - u);
    if base <= 0.0 {
        return Ok(0.0);
    }
    Ok(base.powf(gas.lambda()))
}

/// `(C1, C2)` with `eta = C1 m^2/rho + C2 rho^gamma` for `g = xi^2/2`.
pub fn quadratic_constants(gas: &GasModel) -> Result<(f64, f64)> {
    let l = gas.lambda();
    Ok((0.5 * beta(0.5, l + 1.0)?, 0.5 * beta(1.5, l + 1.0)?))
}

/// A generator bound to a gas, with the quadrature used for every moment.
#[derive(Debug, Clone)]
pub struct EntropyModel {
    gas: GasModel,
    gen: EntropyGenerator,
    policy: QuadPolicy,
}

/// Velocity and `rho^theta` of a non-vacuum state.
struct Frame {
    rho: f64,
    m: f64,
    u: f64,
    r: f64,
}

impl EntropyModel {
    pub fn new(gas: GasModel, gen: EntropyGenerator, policy: QuadPolicy) -> Self {
        Self { gas, gen, policy }
    }

    pub fn gas(&self) -> &GasModel {
        &self.gas
    }

    pub fn generator(&self) -> &EntropyGenerator {
        &self.gen
    }

    pub fn policy(&self) -> QuadPolicy {
        self.policy
    }

    /// Growth exponent of `g`, used to size finite-difference steps.
    pub fn degree(&self) -> f64 {
        match self.gen {
            EntropyGenerator::PowerLaw { p, .. } => p.max(2.0),
            _ => 2.0,
        }
    }

    fn closed_form(&self) -> bool {
        matches!(self.gen, EntropyGenerator::Quadratic) && self.gas.gamma() >= 3.0
    }

    fn frame(&self, s: PhaseState, what: &'static str) -> Result<Frame> {
        if !(s.rho > 0.0) {
            return Err(Error::OutsideDomain {
                what,
                rho: s.rho,
                m: s.m,
            });
        }
        Ok(Frame {
            rho: s.rho,
            m: s.m,
            u: s.m / s.rho,
            r: s.rho.powf(self.gas.theta()),
        })
    }

    /// Zero at `(0, 0)`, error at `(0, m != 0)`, `None` otherwise.
    fn vacuum_value(s: PhaseState) -> Result<Option<f64>> {
        if s.rho == 0.0 {
            if s.m != 0.0 {
                return Err(Error::VacuumMomentum { m: s.m });
            }
            return Ok(Some(0.0));
        }
        Ok(None)
    }

    fn kinks(&self, f: &Frame) -> Vec<f64> {
        match self.gen.kink() {
            Some(k) => {
                let z = (k - f.u) / f.r;
                if z.abs() < 1.0 {
                    vec![z]
                } else {
                    Vec::new()
                }
            }
            None => Vec::new(),
        }
    }

    /// `int phi(z, u + z r) (1 - z^2)^(lambda + shift) dz`.
    fn moment<F: FnMut(f64, f64) -> f64>(&self, f: &Frame, shift: f64, mut phi: F) -> Result<f64> {
        let kinks = self.kinks(f);
        integrate(
            self.policy,
            |z| phi(z, f.u + z * f.r),
            self.gas.lambda() + shift,
            &kinks,
        )
    }

    /// `eta = rho int g(u + z rho^theta) (1 - z^2)^lambda dz`.
    pub fn eta(&self, s: PhaseState) -> Result<f64> {
        if let Some(v) = Self::vacuum_value(s)? {
            return Ok(v);
        }
        if self.closed_form() {
            let (c1, c2) = quadratic_constants(&self.gas)?;
            return Ok(c1 * s.m * s.m / s.rho + c2 * s.rho.powf(self.gas.gamma()));
        }
        require_kinetic(&self.gas)?;
        let f = self.frame(s, "eta")?;
        Ok(f.rho * self.moment(&f, 0.0, |_, xi| self.gen.g(xi))?)
    }

    /// `q = rho int g(u + z rho^theta)(u + theta z rho^theta)(1 - z^2)^lambda dz`.
    pub fn q_flux(&self, s: PhaseState) -> Result<f64> {
        if let Some(v) = Self::vacuum_value(s)? {
            return Ok(v);
        }
        let th = self.gas.theta();
        if self.closed_form() {
            return Err(Error::Unsupported(
                "entropy flux needs the kinetic representation".into(),
            ));
        }
        require_kinetic(&self.gas)?;
        let f = self.frame(s, "q")?;
        Ok(f.rho * self.moment(&f, 0.0, |z, xi| self.gen.g(xi) * (f.u + th * z * f.r))?)
    }

    pub fn gradient(&self, s: PhaseState) -> Result<[f64; 2]> {
        let f = self.frame(s, "entropy gradient")?;
        if self.closed_form() {
            let (c1, c2) = quadratic_constants(&self.gas)?;
            let g = self.gas.gamma();
            return Ok([
                -c1 * f.u * f.u + c2 * g * f.rho.powf(g - 1.0),
                2.0 * c1 * f.u,
            ]);
        }
        require_kinetic(&self.gas)?;
        let th = self.gas.theta();
        let g0 = self.moment(&f, 0.0, |_, xi| self.gen.g(xi))?;
        let g1s = self.moment(&f, 0.0, |z, xi| self.gen.g1(xi) * (-f.u + z * th * f.r))?;
        let g1 = self.moment(&f, 0.0, |_, xi| self.gen.g1(xi))?;
        Ok([g0 + g1s, g1])
    }

    /// Hessian of `eta` in `(rho, m)`.
    pub fn hessian(&self, s: PhaseState) -> Result<Sym2> {
        let f = self.frame(s, "entropy Hessian")?;
        if self.closed_form() {
            let (c1, c2) = quadratic_constants(&self.gas)?;
            let g = self.gas.gamma();
            return Ok(Sym2 {
                rr: 2.0 * c1 * f.u * f.u / f.rho + c2 * g * (g - 1.0) * f.rho.powf(g - 2.0),
                rm: -2.0 * c1 * f.u / f.rho,
                mm: 2.0 * c1 / f.rho,
            });
        }
        require_kinetic(&self.gas)?;
        let th = self.gas.theta();
        let sv = |z: f64| -f.u + z * th * f.r;
        let g2 = |xi: f64| self.gen.g2(xi);
        let top = self.moment(&f, 1.0, |_, xi| g2(xi))?;
        let s2 = self.moment(&f, 0.0, |z, xi| sv(z) * sv(z) * g2(xi))?;
        let s1 = self.moment(&f, 0.0, |z, xi| sv(z) * g2(xi))?;
        let s0 = self.moment(&f, 0.0, |_, xi| g2(xi))?;
        Ok(Sym2 {
            rr: th * th * f.r * f.r / f.rho * top + s2 / f.rho,
            rm: s1 / f.rho,
            mm: s0 / f.rho,
        })
    }

    /// `Q1 = m int g'(u + z rho^theta)(1 - z^2)^lambda dz`. For the power-law
    /// generator this is the functional called `A`.
    pub fn q_one(&self, s: PhaseState) -> Result<f64> {
        if let Some(v) = Self::vacuum_value(s)? {
            return Ok(v);
        }
        require_kinetic(&self.gas)?;
        let f = self.frame(s, "Q1")?;
        Ok(f.m * self.moment(&f, 0.0, |_, xi| self.gen.g1(xi))?)
    }

    pub fn q_one_gradient(&self, s: PhaseState) -> Result<[f64; 2]> {
        require_kinetic(&self.gas)?;
        let f = self.frame(s, "Q1 gradient")?;
        let th = self.gas.theta();
        let i0 = self.moment(&f, 0.0, |_, xi| self.gen.g1(xi))?;
        let ir = self.moment(&f, 0.0, |z, xi| self.gen.g2(xi) * (-f.u + z * th * f.r))? / f.rho;
        let im = self.moment(&f, 0.0, |_, xi| self.gen.g2(xi))? / f.rho;
        Ok([f.m * ir, i0 + f.m * im])
    }

    pub fn q_one_hessian(&self, s: PhaseState) -> Result<Sym2> {
        require_kinetic(&self.gas)?;
        if !self.gen.has_g3() {
            return Err(Error::Unsupported("analytic Q1 Hessian needs g'''".into()));
        }
        let f = self.frame(s, "Q1 Hessian")?;
        let th = self.gas.theta();
        let sv = |z: f64| -f.u + z * th * f.r;
        let g3 = |xi: f64| self.gen.g3(xi).unwrap_or(f64::NAN);
        let g2 = |xi: f64| self.gen.g2(xi);
        let r2 = f.rho * f.rho;
        let ir = self.moment(&f, 0.0, |z, xi| g2(xi) * sv(z))? / f.rho;
        let im = self.moment(&f, 0.0, |_, xi| g2(xi))? / f.rho;
        let irr = self.moment(&f, 0.0, |z, xi| {
            g3(xi) * sv(z) * sv(z) + g2(xi) * (2.0 * f.u + z * th * (th - 1.0) * f.r)
        })? / r2;
        let irm = self.moment(&f, 0.0, |z, xi| g3(xi) * sv(z) - g2(xi))? / r2;
        let imm = self.moment(&f, 0.0, |_, xi| g3(xi))? / r2;
        Ok(Sym2 {
            rr: f.m * irr,
            rm: ir + f.m * irm,
            mm: 2.0 * im + f.m * imm,
        })
    }

    /// `(A, B)` with `A = m int g' w` and `B = rho^(theta+1) int g' z w`, so
    /// that `eta = (gamma-1)/(2 gamma) (A + B)` for the power-law generator.
    pub fn decompose_ab(&self, s: PhaseState) -> Result<(f64, f64)> {
        if !self.gen.is_power_law() {
            return Err(Error::Unsupported(
                "the A/B split is defined for the power-law generator".into(),
            ));
        }
        require_kinetic(&self.gas)?;
        let f = self.frame(s, "A/B split")?;
        let a = f.m * self.moment(&f, 0.0, |_, xi| self.gen.g1(xi))?;
        let b = f.rho * f.r * self.moment(&f, 0.0, |z, xi| self.gen.g1(xi) * z)?;
        Ok((a, b))
    }
}

/// `eta` of a model as a [`Functional`].
pub struct EntropyFunctional(pub EntropyModel);

impl Functional for EntropyFunctional {
    fn degree(&self) -> f64 {
        self.0.degree()
    }

    fn name(&self) -> String {
        format!("eta[{}]", self.0.generator().name())
    }

    fn value(&self, s: PhaseState) -> Result<f64> {
        self.0.eta(s)
    }

    fn gradient(&self, s: PhaseState) -> Result<[f64; 2]> {
        self.0.gradient(s)
    }

    fn hessian(&self, s: PhaseState) -> Result<Sym2> {
        self.0.hessian(s)
    }
}

/// `Q1` (equal to `A` for the power-law generator) as a [`Functional`].
pub struct QOneFunctional(pub EntropyModel);

impl Functional for QOneFunctional {
    fn degree(&self) -> f64 {
        self.0.degree()
    }

    fn name(&self) -> String {
        if self.0.generator().is_power_law() {
            "A".into()
        } else {
            format!("Q1[{}]", self.0.generator().name())
        }
    }

    fn value(&self, s: PhaseState) -> Result<f64> {
        self.0.q_one(s)
    }

    fn gradient(&self, s: PhaseState) -> Result<[f64; 2]> {
        self.0.q_one_gradient(s)
    }

    fn hessian(&self, s: PhaseState) -> Result<Sym2> {
        self.0.q_one_hessian(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{fd_gradient, fd_hessian, relative, RelativePair};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn gas(g: f64) -> GasModel {
        GasModel::new(g).unwrap()
    }

    fn st(rho: f64, m: f64) -> PhaseState {
        PhaseState::new(rho, m).unwrap()
    }

    fn quad(g: f64) -> EntropyModel {
        EntropyModel::new(gas(g), EntropyGenerator::quadratic(), QuadPolicy::Adaptive)
    }

    fn power(g: f64, policy: QuadPolicy) -> EntropyModel {
        let gm = gas(g);
        EntropyModel::new(gm, EntropyGenerator::power_law(&gm), policy)
    }

    #[test]
    fn chi_examples() {
        let g = gas(2.0);
        assert!((chi(&g, 0.3, 4.0, 0.3).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(chi(&g, 0.3 + 2.0 * 2.0, 4.0, 0.3).unwrap(), 0.0);
        assert!((chi(&g, 0.5, 1.0, 0.0).unwrap() - 0.75f64.sqrt()).abs() < 1e-15);
        assert!(chi(&gas(3.0), 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn quadratic_examples() {
        let m = quad(2.0);
        assert!((m.eta(st(1.0, 0.0)).unwrap() - PI / 16.0).abs() < 1e-14);
        assert!((m.eta(st(1.0, 1.0)).unwrap() - (PI / 4.0 + PI / 16.0)).abs() < 1e-14);
        let h = m.hessian(st(1.0, 0.0)).unwrap();
        assert!((h.rr - PI / 8.0).abs() < 1e-14);
        assert!(h.rm.abs() < 1e-15);
        assert!((h.mm - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn vacuum_conventions() {
        let m = quad(1.5);
        assert_eq!(m.eta(PhaseState { rho: 0.0, m: 0.0 }).unwrap(), 0.0);
        assert!(m.eta(PhaseState { rho: 0.0, m: 1.0 }).is_err());
        assert!(m.hessian(PhaseState { rho: 0.0, m: 0.0 }).is_err());
        assert!(m.q_flux(PhaseState { rho: 0.0, m: 2.0 }).is_err());
    }

    #[test]
    fn quadratic_closed_form_over_grid() {
        for &g in &[1.1, 1.5, 2.0, 2.5] {
            let m = quad(g);
            let (c1, c2) = quadratic_constants(m.gas()).unwrap();
            for i in 0..20 {
                for j in 0..20 {
                    let rho = 0.05 + 0.15 * i as f64;
                    let mom = -2.0 + 0.2 * j as f64;
                    let want = c1 * mom * mom / rho + c2 * rho.powf(g);
                    let got = m.eta(st(rho, mom)).unwrap();
                    assert!((got - want).abs() <= 1e-10 * want.abs(), "gamma {g}");
                }
            }
        }
    }

    #[test]
    fn quadratic_beyond_three_uses_closed_form() {
        let m = quad(3.5);
        let (c1, c2) = quadratic_constants(m.gas()).unwrap();
        let v = m.eta(st(1.5, 0.5)).unwrap();
        assert!((v - (c1 * 0.25 / 1.5 + c2 * 1.5f64.powf(3.5))).abs() < 1e-14);
        let pm = power(1.5, QuadPolicy::Adaptive);
        let bad = EntropyModel::new(gas(3.5), pm.generator().clone(), QuadPolicy::Adaptive);
        assert!(bad.eta(st(1.0, 0.0)).is_err());
        let fd = fd_hessian(&EntropyFunctional(m.clone()), st(1.5, 0.5)).unwrap();
        let an = m.hessian(st(1.5, 0.5)).unwrap();
        assert!((fd.rr - an.rr).abs() < 1e-8 * an.rr.abs());
    }

    #[test]
    fn quadratic_flux_matches_direct_integral() {
        let g = 1.4;
        let m = quad(g);
        let gm = gas(g);
        let (rho, mom): (f64, f64) = (1.3, 0.6);
        let (u, r, th) = (mom / rho, rho.powf(gm.theta()), gm.theta());
        let direct = crate::quadrature::integrate_weighted(
            |z| 0.5 * (u + z * r).powi(2) * (u + th * z * r),
            gm.lambda(),
            200,
            &[],
        )
        .unwrap()
            * rho;
        assert!((m.q_flux(st(rho, mom)).unwrap() - direct).abs() < 1e-12 * direct.abs());
    }

    #[test]
    fn eta_hessian_vs_differences() {
        let m = power(1.2, QuadPolicy::Fixed(128));
        let s = st(1.3, 0.7);
        let an = m.hessian(s).unwrap();
        let fd = fd_hessian(&EntropyFunctional(m.clone()), s).unwrap();
        let scale = an.spectral_norm();
        for (a, b) in [(an.rr, fd.rr), (an.rm, fd.rm), (an.mm, fd.mm)] {
            assert!((a - b).abs() < 1e-5 * scale, "{a} vs {b}");
        }
        let q = EntropyModel::new(
            gas(1.2),
            EntropyGenerator::quadratic(),
            QuadPolicy::Fixed(64),
        );
        let an = q.hessian(s).unwrap();
        let fd = fd_hessian(&EntropyFunctional(q), s).unwrap();
        assert!((an.rr - fd.rr).abs() < 1e-5 * an.spectral_norm());
    }

    #[test]
    fn gradients_vs_differences() {
        for g in [1.15, 1.3, 2.0] {
            let m = power(g, QuadPolicy::Fixed(128));
            for s in [st(0.8, 0.3), st(2.1, -1.5), st(0.3, 0.0)] {
                let an = m.gradient(s).unwrap();
                let fd = fd_gradient(&EntropyFunctional(m.clone()), s).unwrap();
                let sc = an[0].abs().max(an[1].abs()).max(1e-300);
                assert!(
                    (an[0] - fd[0]).abs() < 1e-7 * sc && (an[1] - fd[1]).abs() < 1e-7 * sc,
                    "eta gamma {g} {s:?}: {an:?} vs {fd:?}"
                );
                // A vanishes identically at m = 0, so borrow the entropy's scale
                let sc = sc.max(an[0].abs()).max(an[1].abs());
                let an = m.q_one_gradient(s).unwrap();
                let fd = fd_gradient(&QOneFunctional(m.clone()), s).unwrap();
                let sc = sc.max(an[0].abs()).max(an[1].abs());
                assert!(
                    (an[0] - fd[0]).abs() < 1e-7 * sc && (an[1] - fd[1]).abs() < 1e-7 * sc,
                    "A gamma {g} {s:?}: {an:?} vs {fd:?}"
                );
            }
        }
    }

    #[test]
    fn q_one_hessian_vs_differences() {
        for g in [1.1, 1.25, 1.37, 2.0] {
            let m = power(g, QuadPolicy::Fixed(128));
            for s in [st(1.1, 0.5), st(0.4, -0.7), st(2.0, 0.0)] {
                let an = m.q_one_hessian(s).unwrap();
                let fd = fd_hessian(&QOneFunctional(m.clone()), s).unwrap();
                let scale = an.spectral_norm();
                for (a, b) in [(an.rr, fd.rr), (an.rm, fd.rm), (an.mm, fd.mm)] {
                    assert!((a - b).abs() < 1e-6 * scale, "gamma {g}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn quadratic_q_one_is_twice_kinetic_part() {
        let m = quad(1.6);
        let (c1, _) = quadratic_constants(m.gas()).unwrap();
        let s = st(0.9, 0.4);
        let want = 2.0 * c1 * s.m * s.m / s.rho;
        assert!((m.q_one(s).unwrap() - want).abs() < 1e-13);
    }

    #[test]
    fn decomposition_identity() {
        for &g in &[1.1, 1.2, 1.28] {
            let m = power(g, QuadPolicy::Adaptive);
            for s in [st(1.7, 0.4), st(0.2, -0.5), st(2.5, 3.0)] {
                let (a, b) = m.decompose_ab(s).unwrap();
                let eta = m.eta(s).unwrap();
                assert!(((g - 1.0) / (2.0 * g) * (a + b) - eta).abs() < 1e-9 * eta.abs());
            }
        }
        let m = power(1.2, QuadPolicy::Adaptive);
        let (a, b) = m.decompose_ab(st(1.0, 0.0)).unwrap();
        assert_eq!(a, 0.0);
        assert!(b > 0.0);
        assert!(quad(1.2).decompose_ab(st(1.0, 0.0)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn convex_generators_give_psd_hessians(
            g in 1.05f64..2.9, rho in 0.05f64..3.0, c in -2.0f64..2.0, pick in 0usize..2,
        ) {
            let gm = gas(g);
            let gen = if pick == 0 { EntropyGenerator::quadratic() } else { EntropyGenerator::power_law(&gm) };
            let m = EntropyModel::new(gm, gen, QuadPolicy::Fixed(96));
            let h = m.hessian(st(rho, c * rho)).unwrap();
            prop_assert!(h.min_eigenvalue() >= -1e-10 * h.spectral_norm().max(1.0));
        }

        #[test]
        fn relative_entropy_nonnegative(
            g in 1.05f64..2.5, r in 0.05f64..3.0, rb in 0.05f64..3.0, a in -2.0f64..2.0, b in -2.0f64..2.0,
        ) {
            let m = power(g, QuadPolicy::Fixed(96));
            let f = EntropyFunctional(m);
            let pair = RelativePair { v: st(r, a * r), vbar: st(rb, b * rb) };
            let rel = relative(&f, &pair).unwrap();
            let scale = f.value(pair.v).unwrap().abs() + f.value(pair.vbar).unwrap().abs();
            prop_assert!(rel >= -1e-10 * scale);
        }
    }
}
