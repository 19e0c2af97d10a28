use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::gas::GasModel;

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(v: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for &x in v {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Uniform cell-centred grid on `[x_min, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n_cells: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(invalid("x_max", x_max, "must exceed x_min"));
        }
        if n_cells < 4 {
            return Err(invalid("n_cells", n_cells as f64, "need at least 4 cells"));
        }
        Ok(Self {
            x_min,
            x_max,
            n_cells,
        })
    }

    /// Symmetric grid `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, n_cells: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n_cells)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_cells as f64
    }

    /// Left edge of cell `i`.
    pub fn edge(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.center(i)).collect()
    }
}

/// Cell averages of density and momentum at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub grid: Grid1D,
    pub rho: Vec<f64>,
    pub m: Vec<f64>,
    pub t: f64,
    /// Mass added by raising cells to the density floor since the start.
    pub clip_mass: f64,
}

impl FieldState {
    pub fn new(grid: Grid1D, rho: Vec<f64>, m: Vec<f64>, t: f64) -> Result<Self> {
        let n = grid.n_cells();
        if rho.len() != n || m.len() != n {
            return Err(invalid(
                "len",
                rho.len() as f64,
                "field length must match the grid",
            ));
        }
        if let Some(&r) = rho.iter().find(|r| !(**r >= 0.0) || !r.is_finite()) {
            return Err(invalid("rho", r, "density must be finite and nonnegative"));
        }
        if let Some(&v) = m.iter().find(|v| !v.is_finite()) {
            return Err(invalid("m", v, "momentum must be finite"));
        }
        Ok(Self {
            grid,
            rho,
            m,
            t,
            clip_mass: 0.0,
        })
    }

    /// Uniform state.
    pub fn constant(grid: Grid1D, rho: f64, m: f64) -> Result<Self> {
        let n = grid.n_cells();
        Self::new(grid, vec![rho; n], vec![m; n], 0.0)
    }

    pub fn mass(&self) -> f64 {
        compensated_sum(&self.rho) * self.grid.dx()
    }

    pub fn max_rho(&self) -> f64 {
        self.rho.iter().copied().fold(0.0, f64::max)
    }

    /// `int (m^2/(2 rho) + kappa rho^gamma/(gamma-1)) dx`, with the kinetic
    /// part dropped at or below `floor`. Proportional to the quadratic-generator
    /// entropy with positive factor.
    pub fn mechanical_energy(&self, gas: &GasModel, floor: f64) -> f64 {
        let (g, k) = (gas.gamma(), gas.kappa());
        let e: f64 = self
            .rho
            .iter()
            .zip(&self.m)
            .map(|(&r, &m)| {
                let kin = if r > floor { 0.5 * m * m / r } else { 0.0 };
                kin + k * r.powf(g) / (g - 1.0)
            })
            .sum();
        e * self.grid.dx()
    }

    /// `max |m| / max(rho, floor)`.
    pub fn max_speed_ratio(&self, floor: f64) -> f64 {
        self.rho
            .iter()
            .zip(&self.m)
            .map(|(&r, &m)| m.abs() / r.max(floor))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(&v), 2.0);
        assert_eq!(compensated_sum(&[]), 0.0);
    }

    #[test]
    fn grid_geometry() {
        let g = Grid1D::new(-1.0, 3.0, 8).unwrap();
        assert_eq!(g.dx(), 0.5);
        assert_eq!(g.center(0), -0.75);
        assert_eq!(g.edge(8), 3.0);
        assert_eq!(g.centers().len(), 8);
        assert!(Grid1D::new(1.0, 1.0, 8).is_err());
        assert!(Grid1D::new(0.0, 1.0, 2).is_err());
    }

    #[test]
    fn state_validation() {
        let g = Grid1D::new(0.0, 1.0, 4).unwrap();
        assert!(FieldState::new(g, vec![1.0; 3], vec![0.0; 4], 0.0).is_err());
        assert!(FieldState::new(g, vec![1.0, -1.0, 1.0, 1.0], vec![0.0; 4], 0.0).is_err());
        assert!(FieldState::new(g, vec![1.0; 4], vec![f64::NAN; 4], 0.0).is_err());
        let s = FieldState::constant(g, 2.0, 1.0).unwrap();
        assert_eq!(s.mass(), 2.0);
        assert_eq!(s.max_speed_ratio(1e-12), 0.5);
    }

    #[test]
    fn energy_of_uniform_state() {
        let gas = GasModel::new(2.0).unwrap();
        let g = Grid1D::new(0.0, 2.0, 4).unwrap();
        let s = FieldState::constant(g, 1.0, 1.0).unwrap();
        // (1/2 + 1/8) * 2
        assert!((s.mechanical_energy(&gas, 1e-13) - 1.25).abs() < 1e-15);
    }
}
