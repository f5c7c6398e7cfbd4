use std::f64::consts::PI;

use super::sphere::period_cells;
use crate::error::{Error, Result};
use crate::grid::{PerforatedDomain, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeasureMode {
    /// `(3/4π)(ε/r_ε)^3` times the cell volume on every solid cell.
    #[default]
    Voxel,
    /// Voxel weights of each sphere rescaled so that the sphere carries the
    /// mass `(3/4π)(ε/r_ε)^3 |B(εk, r_ε)| = ε^3` exactly.
    Analytic,
}

/// Discrete version of the suspension measure `(3/4π)(ε/r_ε)^3 1_T dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureWeights {
    pub mode: MeasureMode,
    /// One weight per cell, zero on fluid cells.
    pub weights: Vec<f64>,
}

impl MeasureWeights {
    pub fn new(dom: &PerforatedDomain, mode: MeasureMode) -> Self {
        let grid = dom.grid();
        let density = 0.75 / PI * (dom.epsilon / dom.r_eps).powi(3);
        let voxel = density * grid.cell_volume();
        let per_sphere: Vec<f64> = dom
            .voxels_per_sphere()
            .iter()
            .map(|&count| match mode {
                MeasureMode::Voxel => voxel,
                MeasureMode::Analytic => dom.epsilon.powi(3) / count as f64,
            })
            .collect();
        let weights = (0..grid.cell_count())
            .map(|c| dom.sphere_of(c).map_or(0.0, |s| per_sphere[s]))
            .collect();
        Self { mode, weights }
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// `∫ field dm`.
pub fn measure_integral(field: &ScalarField, w: &MeasureWeights) -> Result<f64> {
    if field.values.len() != w.weights.len() {
        return Err(Error::GridMismatch("field and measure weights differ in size".into()));
    }
    Ok(crate::par::sum_indexed(w.weights.len(), |c| w.weights[c] * field.values[c]))
}

/// Exact mass of the measure, `card(Z_ε) ε^3`.
pub fn analytic_mass(dom: &PerforatedDomain) -> f64 {
    dom.sphere_count() as f64 * dom.epsilon.powi(3)
}

/// `|Ω| - card(Z_ε) ε^3`: the boundary layer of period cells that do not fit.
pub fn mass_deficit(dom: &PerforatedDomain) -> f64 {
    dom.domain().volume() - analytic_mass(dom)
}

/// `|φ - φ^ε|_{m_ε}` where `φ^ε` equals the mean of `φ` over `Y_ε^k` on each
/// ball. Cube means use a 4-point Gauss rule per axis on each grid cell.
pub fn ball_mean_defect<F>(phi: F, dom: &PerforatedDomain, w: &MeasureWeights) -> f64
where
    F: Fn([f64; 3]) -> f64 + Sync,
{
    let grid = dom.grid();
    let h = grid.h();
    let (nodes, gw) = super::sphere::gauss_legendre(4);
    let cell_mean = |c: [usize; 3]| {
        let x0 = grid.cell_center(c);
        let mut acc = 0.0;
        for (a, wa) in nodes.iter().zip(&gw) {
            for (b, wb) in nodes.iter().zip(&gw) {
                for (e, we) in nodes.iter().zip(&gw) {
                    let x = [x0[0] + 0.5 * h[0] * a, x0[1] + 0.5 * h[1] * b, x0[2] + 0.5 * h[2] * e];
                    acc += wa * wb * we * phi(x);
                }
            }
        }
        acc / 8.0
    };
    let means: Vec<f64> = crate::par::map_jobs(&(0..dom.sphere_count()).collect::<Vec<_>>(), |&s| {
        let [ri, rj, rk] = period_cells(dom, s);
        let mut acc = 0.0;
        let mut count = 0usize;
        for k in rk {
            for j in rj.clone() {
                for i in ri.clone() {
                    acc += cell_mean([i, j, k]);
                    count += 1;
                }
            }
        }
        acc / count as f64
    });
    let sq = crate::par::sum_indexed(grid.cell_count(), |c| match dom.sphere_of(c) {
        Some(s) => {
            let d = phi(grid.cell_center(grid.coords(c))) - means[s];
            w.weights[c] * d * d
        }
        None => 0.0,
    });
    sq.sqrt()
}
