use serde::{Deserialize, Serialize};

use crate::barenblatt::BarenblattProfile;
use crate::error::{invalid, Error, Result};

use super::state::{compensated_sum, FieldState, Grid1D};

/// Relative tolerance on the net mass of a perturbation.
pub const NEUTRALITY_TOL: f64 = 1e-12;

/// Default ratio of the domain half-width to the support radius at `t_end`.
pub const DOMAIN_FACTOR: f64 = 1.25;

/// Density perturbation added to the initial profile. The momentum is the
/// perturbed density times the profile velocity, so `|m0| <= C rho0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbationSpec {
    #[default]
    None,
    /// `+delta` on `[0, width]` and `-delta` on `[-width, 0]`.
    Box { delta: f64, width: f64 },
    /// `rho_bar (1 + amplitude sin(modes pi x / R0))` with `R0` the initial support radius.
    Sine { amplitude: f64, modes: u32 },
    /// Per-cell additive density; must match the grid length.
    Cells { values: Vec<f64> },
}

/// Symmetric grid of half-width `DOMAIN_FACTOR * R(t_end)`.
pub fn domain_for(profile: &BarenblattProfile, t_end: f64, n_cells: usize) -> Result<Grid1D> {
    Grid1D::symmetric(
        DOMAIN_FACTOR * profile.support_radius(t_end.max(0.0)),
        n_cells,
    )
}

/// Whether the grid contains the support at time `t`.
pub fn covers_support(grid: &Grid1D, profile: &BarenblattProfile, t: f64) -> bool {
    let r = profile.support_radius(t);
    grid.x_min() <= -r && grid.x_max() >= r
}

/// Cell averages of the profile at `t = 0` plus the perturbation.
pub fn init_from_profile(
    profile: &BarenblattProfile,
    grid: &Grid1D,
    perturbation: &PerturbationSpec,
) -> Result<FieldState> {
    if !covers_support(grid, profile, 0.0) {
        return Err(invalid(
            "x_max",
            grid.x_max(),
            "grid must contain the initial support",
        ));
    }
    let n = grid.n_cells();
    let dx = grid.dx();
    let r0 = profile.support_radius(0.0);
    let u = |x: f64| profile.velocity(x, 0.0);
    let mut rho = vec![0.0; n];
    let mut m = vec![0.0; n];
    let mut pert = vec![0.0; n];

    for i in 0..n {
        let (a, b) = (grid.edge(i), grid.edge(i + 1));
        rho[i] = profile.integrate_against(a, b, 0.0, |_| 1.0)? / dx;
        m[i] = profile.integrate_against(a, b, 0.0, u)? / dx;
    }

    match perturbation {
        PerturbationSpec::None => {}
        PerturbationSpec::Box { delta, width } => {
            let (delta, width) = (*delta, *width);
            if !(delta.is_finite() && width.is_finite() && width > 0.0) {
                return Err(invalid(
                    "width",
                    width,
                    "box needs finite delta and width > 0",
                ));
            }
            let floor = profile.density(width, 0.0);
            if width >= r0 || delta.abs() > floor {
                return Err(Error::Perturbation(format!(
                    "box amplitude {delta} exceeds min rho = {floor} on [-{width}, {width}]"
                )));
            }
            // int of x over the overlap, for the momentum of the box
            let moment = |lo: f64, hi: f64| 0.5 * (hi * hi - lo * lo);
            let g1 = profile.gamma_plus_one();
            for i in 0..n {
                let (a, b) = (grid.edge(i), grid.edge(i + 1));
                let (pl, ph) = (a.max(0.0), b.min(width));
                let (nl, nh) = (a.max(-width), b.min(0.0));
                let mut d = 0.0;
                let mut dm = 0.0;
                if ph > pl {
                    d += delta * (ph - pl);
                    dm += delta * moment(pl, ph) / g1;
                }
                if nh > nl {
                    d -= delta * (nh - nl);
                    dm -= delta * moment(nl, nh) / g1;
                }
                pert[i] = d / dx;
                m[i] += dm / dx;
            }
        }
        PerturbationSpec::Sine { amplitude, modes } => {
            let eps = *amplitude;
            if !(eps.abs() < 1.0) {
                return Err(Error::Perturbation(format!(
                    "sine amplitude {eps} would make the density negative"
                )));
            }
            let k = *modes as f64 * std::f64::consts::PI / r0;
            for i in 0..n {
                let (a, b) = (grid.edge(i), grid.edge(i + 1));
                let s = |x: f64| eps * (k * x).sin();
                pert[i] = profile.integrate_against(a, b, 0.0, s)? / dx;
                m[i] += profile.integrate_against(a, b, 0.0, |x| s(x) * u(x))? / dx;
            }
        }
        PerturbationSpec::Cells { values } => {
            if values.len() != n {
                return Err(Error::Perturbation(format!(
                    "{} cell values for a grid of {n} cells",
                    values.len()
                )));
            }
            pert.copy_from_slice(values);
            for (i, v) in values.iter().enumerate() {
                m[i] += v * u(grid.center(i));
            }
        }
    }

    let net = compensated_sum(&pert) * dx;
    if net.abs() > NEUTRALITY_TOL * profile.mass() {
        return Err(Error::Perturbation(format!("net mass {net:e} is not zero")));
    }
    for i in 0..n {
        rho[i] += pert[i];
        if rho[i] < 0.0 || !rho[i].is_finite() {
            return Err(Error::Perturbation(format!(
                "density {} in cell {i} at x = {}",
                rho[i],
                grid.center(i)
            )));
        }
    }
    FieldState::new(*grid, rho, m, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::GasModel;

    fn profile(g: f64) -> BarenblattProfile {
        BarenblattProfile::new(GasModel::new(g).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn unperturbed_mass() {
        for &g in &[1.2, 2.0, 3.0] {
            let p = profile(g);
            let grid = domain_for(&p, 10.0, 401).unwrap();
            let s = init_from_profile(&p, &grid, &PerturbationSpec::None).unwrap();
            assert!((s.mass() - 1.0).abs() < 1e-10, "gamma {g}: {}", s.mass());
            assert_eq!(s.t, 0.0);
            assert!(s.rho.iter().all(|r| *r >= 0.0));
        }
    }

    #[test]
    fn momentum_bounded_by_density() {
        let p = profile(2.0);
        let grid = domain_for(&p, 0.0, 200).unwrap();
        let c = p.support_radius(0.0) / 3.0;
        let s = init_from_profile(
            &p,
            &grid,
            &PerturbationSpec::Sine {
                amplitude: 0.3,
                modes: 3,
            },
        )
        .unwrap();
        for (r, m) in s.rho.iter().zip(&s.m) {
            assert!(m.abs() <= c * r * (1.0 + 1e-12) + 1e-300);
        }
    }

    #[test]
    fn box_keeps_mass() {
        let p = profile(2.0);
        let grid = domain_for(&p, 5.0, 300).unwrap();
        let pert = PerturbationSpec::Box {
            delta: 0.05,
            width: 1.0,
        };
        let s = init_from_profile(&p, &grid, &pert).unwrap();
        assert!((s.mass() - 1.0).abs() < 1e-10);
        let base = init_from_profile(&p, &grid, &PerturbationSpec::None).unwrap();
        assert!(s
            .rho
            .iter()
            .zip(&base.rho)
            .any(|(a, b)| (a - b).abs() > 0.01));
    }

    #[test]
    fn sine_keeps_mass() {
        let p = profile(1.5);
        let grid = domain_for(&p, 5.0, 257).unwrap();
        let pert = PerturbationSpec::Sine {
            amplitude: 0.5,
            modes: 2,
        };
        let s = init_from_profile(&p, &grid, &pert).unwrap();
        assert!((s.mass() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn oversized_box_rejected() {
        let p = profile(2.0);
        let grid = domain_for(&p, 5.0, 300).unwrap();
        let big = p.density(1.0, 0.0) * 1.01;
        let pert = PerturbationSpec::Box {
            delta: big,
            width: 1.0,
        };
        assert!(matches!(
            init_from_profile(&p, &grid, &pert),
            Err(Error::Perturbation(_))
        ));
        let wide = PerturbationSpec::Box {
            delta: 1e-6,
            width: 10.0,
        };
        assert!(init_from_profile(&p, &grid, &wide).is_err());
        let sine = PerturbationSpec::Sine {
            amplitude: 1.0,
            modes: 1,
        };
        assert!(init_from_profile(&p, &grid, &sine).is_err());
    }

    #[test]
    fn nonneutral_cells_rejected() {
        let p = profile(2.0);
        let grid = domain_for(&p, 0.0, 100).unwrap();
        let mut v = vec![0.0; 100];
        v[50] = 1e-3;
        let err = init_from_profile(&p, &grid, &PerturbationSpec::Cells { values: v.clone() });
        assert!(matches!(err, Err(Error::Perturbation(_))));
        v[49] = -1e-3;
        init_from_profile(&p, &grid, &PerturbationSpec::Cells { values: v }).unwrap();
        let short = PerturbationSpec::Cells {
            values: vec![0.0; 3],
        };
        assert!(init_from_profile(&p, &grid, &short).is_err());
    }

    #[test]
    fn grid_must_cover_support() {
        let p = profile(2.0);
        let grid = Grid1D::symmetric(0.5 * p.support_radius(0.0), 100).unwrap();
        assert!(init_from_profile(&p, &grid, &PerturbationSpec::None).is_err());
        let ok = domain_for(&p, 100.0, 64).unwrap();
        assert!(covers_support(&ok, &p, 100.0));
        assert!((ok.x_max() - 1.25 * p.support_radius(100.0)).abs() < 1e-12);
    }

    #[test]
    fn perturbation_serde() {
        let p: PerturbationSpec =
            serde_json::from_str(r#"{"kind": "box", "delta": 0.1, "width": 1.0}"#).unwrap();
        assert_eq!(
            p,
            PerturbationSpec::Box {
                delta: 0.1,
                width: 1.0
            }
        );
    }
}
