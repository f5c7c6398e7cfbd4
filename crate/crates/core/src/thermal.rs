//! Cell-centred advection–diffusion operator `u·∇θ - div(κ∇θ)` with θ = 0 on
//! the box walls, shared by the micro and macro solvers.

use crate::error::{Error, Result};
use crate::grid::{GridSpec, MacField, ScalarField};
use crate::linalg::{bicgstab_solve, cg_solve, CsrMatrix, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Advection {
    /// First-order upwind on the face fluxes.
    #[default]
    Upwind,
    /// Centred face averages; skew-symmetric for divergence-free velocity.
    Centered,
}

fn harmonic(a: f64, b: f64) -> f64 {
    if a == b {
        a
    } else {
        2.0 * a * b / (a + b)
    }
}

/// Assembles the operator. `active[c] == false` switches advection off in
/// cell `c` (used for solid cells).
pub fn assemble_operator(
    grid: &GridSpec,
    kappa: &[f64],
    velocity: Option<&MacField>,
    active: Option<&[bool]>,
    scheme: Advection,
) -> Result<CsrMatrix> {
    if kappa.len() != grid.cell_count() {
        return Err(Error::DimensionMismatch {
            expected: grid.cell_count(),
            found: kappa.len(),
        });
    }
    if kappa.iter().any(|k| !k.is_finite() || *k <= 0.0) {
        return Err(Error::NonFiniteCoefficient("conductivity"));
    }
    if let Some(u) = velocity {
        if !u.grid().same_as(grid) {
            return Err(Error::GridMismatch("velocity grid differs from thermal grid".into()));
        }
        if u.comps.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteCoefficient("velocity"));
        }
    }
    let n = grid.n();
    let h = grid.h();
    CsrMatrix::from_row_fn(grid.cell_count(), grid.cell_count(), |row, entries| {
        let c = grid.coords(row);
        let kp = kappa[row];
        let mut diag = 0.0;
        let advect = velocity.is_some() && active.is_none_or(|m| m[row]);
        for d in 0..3 {
            let w = 1.0 / (h[d] * h[d]);
            for up in [false, true] {
                let at_wall = if up { c[d] + 1 == n[d] } else { c[d] == 0 };
                // outward normal velocity through this face
                let flux = match (advect, velocity) {
                    (true, Some(u)) => {
                        let mut f = c;
                        if up {
                            f[d] += 1;
                        }
                        let v = u.comps[d][grid.face_index(d, f)];
                        if up {
                            v
                        } else {
                            -v
                        }
                    }
                    _ => 0.0,
                };
                if at_wall {
                    // ghost value -θ_P puts θ = 0 on the wall face
                    diag += 2.0 * kp * w;
                    if scheme == Advection::Upwind && flux > 0.0 {
                        diag += flux / h[d];
                    }
                    continue;
                }
                let mut nb = c;
                if up {
                    nb[d] += 1
                } else {
                    nb[d] -= 1
                }
                let col = grid.index(nb[0], nb[1], nb[2]);
                let kf = harmonic(kp, kappa[col]);
                diag += kf * w;
                let mut off = -kf * w;
                match scheme {
                    Advection::Upwind => {
                        if flux > 0.0 {
                            diag += flux / h[d];
                        } else {
                            off += flux / h[d];
                        }
                    }
                    Advection::Centered => off += 0.5 * flux / h[d],
                }
                if off != 0.0 {
                    entries.push((col, off));
                }
            }
        }
        entries.push((row, diag));
    })
}

/// Solves with CG when the operator is symmetric (no advection) and
/// BiCGStab otherwise.
pub fn solve_operator(a: &CsrMatrix, rhs: &[f64], symmetric: bool, cfg: &SolverConfig) -> Result<Vec<f64>> {
    let out = if symmetric {
        cg_solve(a, rhs, cfg)?
    } else {
        bicgstab_solve(a, rhs, cfg)?
    };
    Ok(out.solution)
}

/// Discrete `∫ κ|∇θ|²` with harmonic face conductivities and the wall
/// half-cell contributions, computed from face differences.
pub fn thermal_energy(theta: &ScalarField, kappa: &[f64]) -> f64 {
    let g = theta.grid();
    let n = g.n();
    let h = g.h();
    let vol = g.cell_volume();
    let t = &theta.values;
    crate::par::sum_indexed(g.cell_count(), |row| {
        let c = g.coords(row);
        let mut acc = 0.0;
        for d in 0..3 {
            let w = 1.0 / (h[d] * h[d]);
            if c[d] == 0 {
                acc += 2.0 * kappa[row] * w * t[row] * t[row];
            }
            if c[d] + 1 == n[d] {
                acc += 2.0 * kappa[row] * w * t[row] * t[row];
            } else {
                let mut nb = c;
                nb[d] += 1;
                let col = g.index(nb[0], nb[1], nb[2]);
                let diff = t[row] - t[col];
                acc += harmonic(kappa[row], kappa[col]) * w * diff * diff;
            }
        }
        acc * vol
    })
}
