use crate::error::{invalid, Result};
use crate::gas::GasModel;

use super::polynomial::{
    a5_case_for, bracket_gap, brackets_direct, brackets_ibp, pathway_violation, A5Polynomials,
};
use super::report::{LemmaReport, SideCheck, ValueGrid, Worst, TOL_ORACLE, TOL_QUADRATURE};

/// Upper end of the adiabatic range where the exponent `2/(gamma-1)`
/// exceeds 7.
pub const BRIDGE_GAMMA_MAX: f64 = 9.0 / 7.0;

/// `0`, the unit-interval grid, `1`, and a few points beyond `1`.
pub fn bridge_default_grid() -> ValueGrid {
    ValueGrid::unit_interval(200).with(&[0.0, 1.0, 1.25, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0])
}

/// Sign of `h1 h2 - h3^2` for `h = |a+z|^(2/(gamma-1))` over the grid, which
/// is the Hessian determinant of `A` up to a positive factor. Every point is
/// evaluated by two quadrature routes; on `(0, 1)` the value is also
/// compared with the Beta-coefficient polynomials. `k`, if given, must be the
/// one matching `n`.
pub fn hessian_bridge_check(
    gas: &GasModel,
    k: Option<u32>,
    a_grid: &ValueGrid,
) -> Result<LemmaReport> {
    let g = gas.gamma();
    if g >= BRIDGE_GAMMA_MAX {
        return Err(invalid("gamma", g, "must lie in (1, 9/7)"));
    }
    let n = gas.n_exponent();
    let (k_n, _) = a5_case_for(n)?;
    if let Some(k) = k {
        if k != k_n {
            return Err(invalid("k", k as f64, "does not match n = 2/(gamma-1)"));
        }
    }
    let poly = A5Polynomials::new(n, k_n)?;
    let mut worst = Worst::new();
    let (mut ibp, mut bounds, mut dom, mut zero) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &a in a_grid.values() {
        let br = brackets_direct(n, a)?;
        let alt = brackets_ibp(n, a)?;
        ibp = ibp.max(bracket_gap(&br, &alt));
        let m = br.det() / (br.h1 * br.h1);
        worst.offer(m, &[("a", a)]);
        if a == 0.0 {
            zero = m.abs();
        }
        if a > 0.0 && a < 1.0 {
            let (b, d) = pathway_violation(&poly, &br, a);
            bounds = bounds.max(b);
            dom = dom.max(d);
        }
    }
    let mut checks = vec![
        SideCheck::new("brackets_ibp_gap", ibp, TOL_ORACLE),
        SideCheck::new("bracket_bounds", bounds, TOL_QUADRATURE),
        SideCheck::new("quadrature_det_minus_f", dom, TOL_QUADRATURE),
    ];
    if a_grid.values().contains(&0.0) {
        checks.push(SideCheck::new("det_at_zero", zero, TOL_QUADRATURE));
    }
    Ok(LemmaReport::build(
        "5.2-bridge",
        &[("gamma", g), ("n", n), ("k", k_n as f64)],
        a_grid.spec(),
        worst,
        TOL_QUADRATURE,
        &[],
        checks,
    ))
}
