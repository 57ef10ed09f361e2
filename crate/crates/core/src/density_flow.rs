//! Densities of the flowing measure on the real line.
//!
//! For real initial data `u(x + i0, t) = pi H(x, t) - i pi f(x, t)`, so the
//! density and Hilbert transform are read off boundary values of the Hopf
//! solution. They obey `f_t = -(1/pi) d/dx arctan(H / f)` wherever `f > 0`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cauchy::boundary_value;
use crate::error::{precondition, Result};
use crate::hopf::FlowSolution;

/// Density below which the transport equation is not evaluated.
pub const DENSITY_FLOOR: f64 = 1e-8;

/// A grid point where the boundary value could not be obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub ix: usize,
    pub it: usize,
    pub message: String,
}

/// `f[it][ix]` and `h[it][ix]` on a tensor grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    pub f: Vec<Vec<f64>>,
    pub h: Vec<Vec<f64>>,
    pub failures: Vec<CellFailure>,
}

/// Evenly spaced points from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Offset from the real axis for boundary values.
pub const DEFAULT_EPS: f64 = 1e-4;

/// Recovers `f` and `H` from `u(x + i eps, t)` with Richardson extrapolation
/// in `eps`. Cells where the solver fails are recorded and left at zero.
pub fn build_density_grid(sol: &FlowSolution, x_grid: &[f64], t_grid: &[f64], eps: f64) -> Result<DensityGrid> {
    if !sol.initial().is_real() {
        return precondition("density grids need a measure on the real line");
    }
    if !(eps > 0.0) {
        return precondition("eps must be positive");
    }
    if t_grid.iter().any(|t| !(0.0..1.0).contains(t)) {
        return precondition("times must lie in [0, 1)");
    }
    let cells: Vec<(usize, usize)> = (0..t_grid.len())
        .flat_map(|it| (0..x_grid.len()).map(move |ix| (it, ix)))
        .collect();
    let values: Vec<std::result::Result<(f64, f64), String>> = cells
        .par_iter()
        .map(|&(it, ix)| {
            let t = t_grid[it];
            boundary_value(&|z| sol.solve_u(z, t), x_grid[ix], eps)
                .map(|w| ((-w.im / PI).max(0.0), w.re / PI))
                .map_err(|e| e.to_string())
        })
        .collect();
    let mut f = vec![vec![0.0; x_grid.len()]; t_grid.len()];
    let mut h = f.clone();
    let mut failures = Vec::new();
    for (&(it, ix), v) in cells.iter().zip(values) {
        match v {
            Ok((fv, hv)) => {
                f[it][ix] = fv;
                h[it][ix] = hv;
            }
            Err(message) => failures.push(CellFailure { ix, it, message }),
        }
    }
    Ok(DensityGrid {
        x: x_grid.to_vec(),
        t: t_grid.to_vec(),
        f,
        h,
        failures,
    })
}

impl DensityGrid {
    /// Tabulates given `f(x, t)` and `H(x, t)`.
    pub fn from_fn(
        x: &[f64],
        t: &[f64],
        f: impl Fn(f64, f64) -> f64,
        h: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let tab = |g: &dyn Fn(f64, f64) -> f64| -> Vec<Vec<f64>> {
            t.iter().map(|&tv| x.iter().map(|&xv| g(xv, tv)).collect()).collect()
        };
        DensityGrid {
            x: x.to_vec(),
            t: t.to_vec(),
            f: tab(&f),
            h: tab(&h),
            failures: Vec::new(),
        }
    }

    fn failed(&self, it: usize, ix: usize) -> bool {
        self.failures.iter().any(|c| c.it == it && c.ix == ix)
    }

    /// Trapezoid mass of each time row.
    pub fn row_masses(&self) -> Vec<f64> {
        self.f
            .iter()
            .map(|row| {
                self.x
                    .windows(2)
                    .zip(row.windows(2))
                    .map(|(xs, fs)| 0.5 * (xs[1] - xs[0]) * (fs[0] + fs[1]))
                    .sum()
            })
            .collect()
    }

    /// Central-difference estimate of `d/dt` of the row masses at interior times.
    pub fn mass_rate(&self) -> Vec<f64> {
        let m = self.row_masses();
        (1..self.t.len().saturating_sub(1))
            .map(|i| (m[i + 1] - m[i - 1]) / (self.t[i + 1] - self.t[i - 1]))
            .collect()
    }
}

/// Residual of `f_t + (1/pi) d/dx arctan(H/f)` at interior cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportResidual {
    /// `None` on the boundary and where `f` is too small or a neighbor failed.
    pub values: Vec<Vec<Option<f64>>>,
    /// Interior cells excluded because the density vanishes there.
    pub flagged: Vec<(usize, usize)>,
}

impl TransportResidual {
    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .flatten()
            .fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Largest residual over cells accepted by `keep(x, t)`.
    pub fn max_abs_where(&self, grid: &DensityGrid, keep: impl Fn(f64, f64) -> bool) -> f64 {
        let mut worst: f64 = 0.0;
        for (it, row) in self.values.iter().enumerate() {
            for (ix, v) in row.iter().enumerate() {
                if let Some(v) = v {
                    if keep(grid.x[ix], grid.t[it]) {
                        worst = worst.max(v.abs());
                    }
                }
            }
        }
        worst
    }
}

/// Central differences over a grid that must be uniform in each direction.
pub fn transport_residual(g: &DensityGrid) -> Result<TransportResidual> {
    let (nx, nt) = (g.x.len(), g.t.len());
    if nx < 3 || nt < 3 {
        return precondition("transport residual needs at least 3 points in x and t");
    }
    let dx = g.x[1] - g.x[0];
    let dt = g.t[1] - g.t[0];
    if !(dx > 0.0 && dt > 0.0) {
        return precondition("grids must increase");
    }
    let flux = |it: usize, ix: usize| (g.h[it][ix] / g.f[it][ix]).atan();
    let mut values = vec![vec![None; nx]; nt];
    let mut flagged = Vec::new();
    for it in 1..nt - 1 {
        for ix in 1..nx - 1 {
            let stencil = [(it, ix), (it - 1, ix), (it + 1, ix), (it, ix - 1), (it, ix + 1)];
            if stencil.iter().any(|&(a, b)| g.failed(a, b)) {
                continue;
            }
            if stencil.iter().any(|&(a, b)| g.f[a][b] <= DENSITY_FLOOR) {
                flagged.push((it, ix));
                continue;
            }
            let ft = (g.f[it + 1][ix] - g.f[it - 1][ix]) / (2.0 * dt);
            let ax = (flux(it, ix + 1) - flux(it, ix - 1)) / (2.0 * dx);
            values[it][ix] = Some(ft + ax / PI);
        }
    }
    Ok(TransportResidual { values, flagged })
}

/// Largest residual and mass drift of a grid, for reporting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensitySummary {
    pub max_residual: f64,
    /// Largest `|mass(t) - (1 - t)|` over rows.
    pub mass_drift: f64,
    /// Largest `|d/dt mass + 1|` over interior rows.
    pub mass_rate_error: f64,
    pub failed_cells: usize,
    pub flagged_cells: usize,
}

pub fn summarize(g: &DensityGrid, residual: &TransportResidual) -> DensitySummary {
    let mass_drift = g
        .row_masses()
        .iter()
        .zip(&g.t)
        .map(|(m, t)| (m - (1.0 - t)).abs())
        .fold(0.0, f64::max);
    let mass_rate_error = g.mass_rate().iter().map(|r| (r + 1.0).abs()).fold(0.0, f64::max);
    DensitySummary {
        max_residual: residual.max_abs(),
        mass_drift,
        mass_rate_error,
        failed_cells: g.failures.len(),
        flagged_cells: residual.flagged.len(),
    }
}
