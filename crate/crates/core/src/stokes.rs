//! MAC discretisation of `-Δu + σ u + ∇p = f`, `div u = 0` with Dirichlet
//! velocity on the box walls and on every face of a solid cell.
//!
//! The velocity unknowns of all three components are stacked as
//! `[u_x | u_y | u_z]`; Dirichlet faces keep an identity row and their
//! couplings are moved to the right-hand side so the operator stays SPD.
//! Pressure unknowns live on fluid cells only.

use crate::error::Result;
use crate::grid::{GridSpec, MacField, ScalarField};
use crate::linalg::{uzawa_solve_with, CsrMatrix, SolverConfig};

#[derive(Debug, Clone)]
pub struct MacStokes {
    grid: GridSpec,
    offsets: [usize; 3],
    a: CsrMatrix,
    b: CsrMatrix,
    dirichlet: Vec<bool>,
    /// Prescribed value on Dirichlet faces, zero elsewhere.
    lift: Vec<f64>,
    /// Right-hand side contributions of the Dirichlet data to the momentum rows.
    lift_rhs: Vec<f64>,
    /// Constraint right-hand side `B_free u = g` from the Dirichlet data.
    g: Vec<f64>,
    pressure_cells: Vec<usize>,
    sigma: f64,
    wall: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct StokesSolution {
    pub u: MacField,
    pub p: ScalarField,
    /// Pressure on fluid cells in dof order; usable as a warm start.
    pub p_dofs: Vec<f64>,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
}

impl MacStokes {
    /// `solid[c]` marks solid cells (all their faces become no-slip);
    /// `sigma` is the zeroth-order coefficient; `wall` is the velocity
    /// prescribed on the box boundary.
    pub fn assemble(grid: GridSpec, solid: Option<&[bool]>, sigma: f64, wall: [f64; 3]) -> Result<Self> {
        let n = grid.n();
        let h = grid.h();
        let offsets = [0, grid.face_count(0), grid.face_count(0) + grid.face_count(1)];
        let total = offsets[2] + grid.face_count(2);
        let is_solid = |c: Option<usize>| match (c, solid) {
            (Some(c), Some(s)) => s[c],
            _ => false,
        };

        let mut dirichlet = vec![false; total];
        let mut lift = vec![0.0; total];
        for d in 0..3 {
            for idx in 0..grid.face_count(d) {
                let f = grid.face_coords(d, idx);
                let (lo, hi) = grid.face_cells(d, f);
                let flat = offsets[d] + idx;
                if grid.is_boundary_face(d, f) {
                    dirichlet[flat] = true;
                    lift[flat] = wall[d];
                }
                if is_solid(lo) || is_solid(hi) {
                    dirichlet[flat] = true;
                    lift[flat] = 0.0;
                }
            }
        }

        let locate = |flat: usize| -> (usize, [usize; 3]) {
            let d = if flat >= offsets[2] {
                2
            } else if flat >= offsets[1] {
                1
            } else {
                0
            };
            (d, grid.face_coords(d, flat - offsets[d]))
        };

        let mut lift_rhs = vec![0.0; total];
        crate::par::fill_indexed(&mut lift_rhs, |row| {
            if dirichlet[row] {
                return 0.0;
            }
            let (d, f) = locate(row);
            let mut acc = 0.0;
            for e in 0..3 {
                let w = 1.0 / (h[e] * h[e]);
                for up in [false, true] {
                    let mut nb = f;
                    let limit = if e == d { n[e] } else { n[e] - 1 };
                    if up {
                        if f[e] == limit {
                            acc += 2.0 * w * wall[d];
                            continue;
                        }
                        nb[e] += 1;
                    } else {
                        if f[e] == 0 {
                            acc += 2.0 * w * wall[d];
                            continue;
                        }
                        nb[e] -= 1;
                    }
                    let col = offsets[d] + grid.face_index(d, nb);
                    if dirichlet[col] {
                        acc += w * lift[col];
                    }
                }
            }
            acc
        });

        let a = CsrMatrix::from_row_fn(total, total, |row, entries| {
            if dirichlet[row] {
                entries.push((row, 1.0));
                return;
            }
            let (d, f) = locate(row);
            let mut diag = sigma;
            for e in 0..3 {
                let w = 1.0 / (h[e] * h[e]);
                // Normal direction: neighbours always exist (boundary faces are
                // Dirichlet). Tangential: out-of-range means a wall half a cell away.
                let limit = if e == d { n[e] } else { n[e] - 1 };
                for up in [false, true] {
                    let at_edge = if up { f[e] == limit } else { f[e] == 0 };
                    if at_edge {
                        diag += 2.0 * w;
                        continue;
                    }
                    let mut nb = f;
                    if up {
                        nb[e] += 1
                    } else {
                        nb[e] -= 1
                    }
                    let col = offsets[d] + grid.face_index(d, nb);
                    diag += w;
                    if !dirichlet[col] {
                        entries.push((col, -w));
                    }
                }
            }
            entries.push((row, diag));
        })?;

        let pressure_cells: Vec<usize> = (0..grid.cell_count())
            .filter(|&c| !solid.is_some_and(|s| s[c]))
            .collect();
        let b = CsrMatrix::from_row_fn(pressure_cells.len(), total, |row, entries| {
            let c = grid.coords(pressure_cells[row]);
            for d in 0..3 {
                let mut up = c;
                up[d] += 1;
                let lo = offsets[d] + grid.face_index(d, c);
                let hi = offsets[d] + grid.face_index(d, up);
                // B = -div
                if !dirichlet[lo] {
                    entries.push((lo, 1.0 / h[d]));
                }
                if !dirichlet[hi] {
                    entries.push((hi, -1.0 / h[d]));
                }
            }
        })?;
        let g: Vec<f64> = pressure_cells
            .iter()
            .map(|&cell| {
                let c = grid.coords(cell);
                let mut div_known = 0.0;
                for d in 0..3 {
                    let mut up = c;
                    up[d] += 1;
                    let lo = offsets[d] + grid.face_index(d, c);
                    let hi = offsets[d] + grid.face_index(d, up);
                    if dirichlet[hi] {
                        div_known += lift[hi] / h[d];
                    }
                    if dirichlet[lo] {
                        div_known -= lift[lo] / h[d];
                    }
                }
                // -div_free(u) - div_known = 0  =>  B u = div_known
                div_known
            })
            .collect();

        Ok(Self {
            grid,
            offsets,
            a,
            b,
            dirichlet,
            lift,
            lift_rhs,
            g,
            pressure_cells,
            sigma,
            wall,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn velocity_matrix(&self) -> &CsrMatrix {
        &self.a
    }

    pub fn divergence_matrix(&self) -> &CsrMatrix {
        &self.b
    }

    pub fn is_dirichlet(&self, axis: usize, face: usize) -> bool {
        self.dirichlet[self.offsets[axis] + face]
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn pressure_cells(&self) -> &[usize] {
        &self.pressure_cells
    }

    /// Momentum right-hand side for a body force (ignored on Dirichlet faces).
    pub fn rhs(&self, force: &MacField) -> Vec<f64> {
        let mut rhs = force.to_flat();
        for (i, r) in rhs.iter_mut().enumerate() {
            *r = if self.dirichlet[i] {
                self.lift[i]
            } else {
                *r + self.lift_rhs[i]
            };
        }
        rhs
    }

    pub fn solve(&self, force: &MacField, cfg: &SolverConfig, p0: Option<&[f64]>) -> Result<StokesSolution> {
        let rhs = self.rhs(force);
        let out = uzawa_solve_with(&self.a, &self.b, &rhs, Some(&self.g), p0, cfg)?;
        let mut p = ScalarField::zeros(self.grid);
        for (dof, &cell) in self.pressure_cells.iter().enumerate() {
            p.values[cell] = out.pressure[dof];
        }
        let mut u = MacField::from_flat(self.grid, &out.velocity);
        // Dirichlet faces are exact by construction; remove solver round-off.
        for d in 0..3 {
            for (idx, v) in u.comps[d].iter_mut().enumerate() {
                if self.dirichlet[self.offsets[d] + idx] {
                    *v = self.lift[self.offsets[d] + idx];
                }
            }
        }
        Ok(StokesSolution {
            u,
            p,
            p_dofs: out.pressure,
            outer_iterations: out.outer_iterations,
            inner_iterations: out.inner_iterations,
        })
    }

    /// Momentum residual `A_full u + grad p - f` on the Dirichlet faces adjacent
    /// to solid cells, i.e. the force the obstacle exerts on the fluid per
    /// unit volume. The full (unconstrained) stencil is used with zero
    /// pressure inside the solid; `solid` must match the assembly mask.
    pub fn constraint_reaction(&self, u: &MacField, p: &ScalarField, solid: &[bool], force: &MacField) -> [f64; 3] {
        let g = &self.grid;
        let n = g.n();
        let h = g.h();
        let vol = g.cell_volume();
        let mut total = [0.0; 3];
        for d in 0..3 {
            for idx in 0..g.face_count(d) {
                let f = g.face_coords(d, idx);
                if g.is_boundary_face(d, f) {
                    continue;
                }
                let (lo, hi) = g.face_cells(d, f);
                let (lo, hi) = (lo.unwrap(), hi.unwrap());
                if !(solid[lo] || solid[hi]) {
                    continue;
                }
                let ui = u.comps[d][idx];
                let mut lap = 0.0;
                for e in 0..3 {
                    let w = 1.0 / (h[e] * h[e]);
                    let limit = if e == d { n[e] } else { n[e] - 1 };
                    for up in [false, true] {
                        let at_edge = if up { f[e] == limit } else { f[e] == 0 };
                        let nb_val = if at_edge {
                            2.0 * self.wall[d] - ui
                        } else {
                            let mut nb = f;
                            if up {
                                nb[e] += 1
                            } else {
                                nb[e] -= 1
                            }
                            u.comps[d][g.face_index(d, nb)]
                        };
                        lap += w * (ui - nb_val);
                    }
                }
                let p_lo = if solid[lo] { 0.0 } else { p.values[lo] };
                let p_hi = if solid[hi] { 0.0 } else { p.values[hi] };
                let grad = (p_hi - p_lo) / h[d];
                total[d] += (lap + self.sigma * ui + grad - force.comps[d][idx]) * vol;
            }
        }
        total
    }
}

/// Discrete `∫|∇u|^2` from face differences, including the half-cell wall
/// ghosts for tangential components. Computed independently of the matrix.
pub fn velocity_dissipation(u: &MacField, wall: [f64; 3]) -> f64 {
    let g = u.grid();
    let n = g.n();
    let h = g.h();
    let vol = g.cell_volume();
    let mut total = 0.0;
    for d in 0..3 {
        let comp = &u.comps[d];
        for idx in 0..g.face_count(d) {
            let f = g.face_coords(d, idx);
            for e in 0..3 {
                let limit = if e == d { n[e] } else { n[e] - 1 };
                let w = 1.0 / (h[e] * h[e]);
                if f[e] < limit {
                    let mut nb = f;
                    nb[e] += 1;
                    let diff = comp[idx] - comp[g.face_index(d, nb)];
                    total += w * diff * diff * vol;
                }
                if e != d {
                    let walls = (f[e] == 0) as u32 + (f[e] == limit) as u32;
                    let diff = comp[idx] - wall[d];
                    total += walls as f64 * 2.0 * w * diff * diff * vol;
                }
            }
        }
    }
    total
}

/// Face-interpolated buoyancy `coeff * theta * e3`.
pub fn buoyancy_force(theta: &ScalarField, coeff: f64) -> MacField {
    let g = *theta.grid();
    let mut force = MacField::zeros(g);
    let n = g.n();
    crate::par::fill_indexed(&mut force.comps[2], |idx| {
        let f = g.face_coords(2, idx);
        if f[2] == 0 || f[2] == n[2] {
            return 0.0;
        }
        let below = theta.values[g.index(f[0], f[1], f[2] - 1)];
        let above = theta.values[g.index(f[0], f[1], f[2])];
        coeff * 0.5 * (below + above)
    });
    force
}
