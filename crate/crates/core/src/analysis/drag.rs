use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{BoxDomain, GridSpec, MacField};
use crate::linalg::SolverConfig;
use crate::stokes::MacStokes;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellDrag {
    /// Force exerted by the fluid on the sphere.
    pub force: [f64; 3],
    /// Component of the force along the imposed velocity.
    pub drag: f64,
    /// `drag / (6π r)`.
    pub ratio: f64,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
}

/// Stokes flow in the cube `[-R, R]^3` with velocity `e3` on the walls and a
/// voxelised no-slip ball of radius `r` at the centre; `grid_n` cells per axis.
pub fn cell_stokes_drag(r: f64, big_r: f64, grid_n: usize, cfg: &SolverConfig) -> Result<CellDrag> {
    cell_stokes_drag_along(r, big_r, grid_n, [0.0, 0.0, 1.0], cfg)
}

pub fn cell_stokes_drag_along(r: f64, big_r: f64, grid_n: usize, e: [f64; 3], cfg: &SolverConfig) -> Result<CellDrag> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::invalid("r", "must be positive"));
    }
    if !(big_r >= 4.0 * r) {
        return Err(Error::invalid("R", "cell problem needs R >= 4 r"));
    }
    let bx = BoxDomain::centered_cube(big_r)?;
    let grid = GridSpec::uniform(bx, grid_n)?;
    let h = grid.max_h();
    if r < 2.0 * h {
        return Err(Error::UnresolvedSphere {
            r_eps: r,
            h_max: h,
            min_n: (4.0 * big_r / r).ceil() as usize,
        });
    }
    let solid: Vec<bool> = (0..grid.cell_count())
        .map(|c| {
            let x = grid.cell_center(grid.coords(c));
            x.iter().map(|v| v * v).sum::<f64>() < r * r
        })
        .collect();
    let stokes = MacStokes::assemble(grid, Some(&solid), 0.0, e)?;
    let force = MacField::zeros(grid);
    let sol = stokes.solve(&force, cfg, None)?;
    let reaction = stokes.constraint_reaction(&sol.u, &sol.p, &solid, &force);
    // the reaction is the force the body applies to the fluid
    let body: [f64; 3] = std::array::from_fn(|d| -reaction[d]);
    let norm = e.iter().map(|v| v * v).sum::<f64>().sqrt();
    let drag = (0..3).map(|d| body[d] * e[d]).sum::<f64>() / norm;
    Ok(CellDrag {
        force: body,
        drag,
        ratio: drag / (6.0 * PI * r * norm),
        outer_iterations: sol.outer_iterations,
        inner_iterations: sol.inner_iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let cfg = SolverConfig::default();
        assert!(matches!(cell_stokes_drag(1.0, 2.0, 16, &cfg), Err(Error::InvalidParameter { .. })));
        assert!(matches!(
            cell_stokes_drag(1.0, 16.0, 16, &cfg),
            Err(Error::UnresolvedSphere { min_n: 64, .. })
        ));
    }

    #[test]
    fn reversed_flow_reverses_force() {
        let cfg = SolverConfig::default().with_rel_tol(1e-8);
        let up = cell_stokes_drag_along(1.0, 4.0, 16, [0.0, 0.0, 1.0], &cfg).unwrap();
        let down = cell_stokes_drag_along(1.0, 4.0, 16, [0.0, 0.0, -1.0], &cfg).unwrap();
        assert!(up.drag > 0.0);
        assert!((up.drag - down.drag).abs() < 1e-6 * up.drag);
        for d in 0..3 {
            assert!((up.force[d] + down.force[d]).abs() < 1e-6 * up.drag);
        }
    }
}
