//! Uzawa iteration for the saddle-point system
//!
//! ```text
//! A u + B^T p = f
//! B u         = g
//! ```
//!
//! realised as conjugate gradients on the pressure Schur complement
//! `S = B A^{-1} B^T`, with inner CG solves for `A`. `B` is assumed to have
//! the constant vector in the kernel of `B^T`; the pressure is kept at zero mean.

use super::{cg_solve, cg_solve_from, CsrMatrix, SolverConfig};
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, PartialEq)]
pub struct SaddleSolution {
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    /// `||B u - g||_2` at exit.
    pub residual: f64,
}

pub fn uzawa_solve(
    a: &CsrMatrix,
    b: &CsrMatrix,
    f: &[f64],
    cfg: &SolverConfig,
) -> Result<SaddleSolution> {
    uzawa_solve_with(a, b, f, None, None, cfg)
}

fn remove_mean(p: &mut [f64]) {
    if p.is_empty() {
        return;
    }
    let mean = par::sum_indexed(p.len(), |i| p[i]) / p.len() as f64;
    p.iter_mut().for_each(|v| *v -= mean);
}

/// Full form: optional constraint right-hand side `g` and initial pressure.
pub fn uzawa_solve_with(
    a: &CsrMatrix,
    b: &CsrMatrix,
    f: &[f64],
    g: Option<&[f64]>,
    p0: Option<&[f64]>,
    cfg: &SolverConfig,
) -> Result<SaddleSolution> {
    cfg.validate()?;
    let nu = a.nrows();
    let np = b.nrows();
    if b.ncols() != nu || f.len() != nu {
        return Err(Error::DimensionMismatch {
            expected: nu,
            found: if b.ncols() != nu { b.ncols() } else { f.len() },
        });
    }
    let zero_g = vec![0.0; np];
    let g = g.unwrap_or(&zero_g);
    let bt = b.transpose();
    let inner = cfg.inner();
    let mut inner_iterations = 0usize;

    let mut solve_a = |rhs: &[f64], x0: Option<&[f64]>| -> Result<Vec<f64>> {
        let out = match x0 {
            Some(x0) => cg_solve_from(a, rhs, x0, &inner)?,
            None => cg_solve(a, rhs, &inner)?,
        };
        inner_iterations += out.iterations;
        Ok(out.solution)
    };

    let constraint_residual = |u: &[f64]| -> Vec<f64> {
        let mut r = b.mul_vec(u);
        r.iter_mut().zip(g).for_each(|(ri, gi)| *ri -= gi);
        r
    };

    // Reference scale: the constraint violation of the pressure-free solve.
    let u_free = solve_a(f, None)?;
    let reference = par::norm2(&constraint_residual(&u_free));
    let target = (cfg.rel_tol * reference).max(cfg.abs_tol);

    let mut p = match p0 {
        Some(p0) if p0.len() == np => p0.to_vec(),
        Some(p0) => {
            return Err(Error::DimensionMismatch {
                expected: np,
                found: p0.len(),
            })
        }
        None => vec![0.0; np],
    };
    remove_mean(&mut p);
    let mut u = if p.iter().any(|&v| v != 0.0) {
        let mut rhs = bt.mul_vec(&p);
        rhs.iter_mut().zip(f).for_each(|(r, fi)| *r = fi - *r);
        solve_a(&rhs, Some(&u_free))?
    } else {
        u_free
    };

    let mut r = constraint_residual(&u);
    remove_mean(&mut r);
    let mut res = par::norm2(&r);
    if res <= target {
        return Ok(SaddleSolution {
            velocity: u,
            pressure: p,
            outer_iterations: 0,
            inner_iterations,
            residual: res,
        });
    }

    let mut d = r.clone();
    let mut rr = par::dot(&r, &r);
    for it in 1..=cfg.max_iter {
        let z = solve_a(&bt.mul_vec(&d), None)?;
        let mut sd = b.mul_vec(&z);
        remove_mean(&mut sd);
        let curvature = par::dot(&d, &sd);
        if curvature <= 0.0 || !curvature.is_finite() {
            return Err(Error::IndefiniteBreakdown {
                iteration: it,
                curvature,
            });
        }
        let alpha = rr / curvature;
        par::axpy(alpha, &d, &mut p);
        par::axpy(-alpha, &z, &mut u);
        par::axpy(-alpha, &sd, &mut r);
        remove_mean(&mut p);
        res = par::norm2(&r);
        if res <= target {
            // Confirm with the constraint evaluated from the velocity itself.
            let mut actual = constraint_residual(&u);
            remove_mean(&mut actual);
            let actual = par::norm2(&actual);
            if actual <= target.max(10.0 * res) {
                return Ok(SaddleSolution {
                    velocity: u,
                    pressure: p,
                    outer_iterations: it,
                    inner_iterations,
                    residual: actual,
                });
            }
        }
        let rr_new = par::dot(&r, &r);
        par::xpby(&r, rr_new / rr, &mut d);
        rr = rr_new;
    }
    Err(Error::MaxIterExceeded {
        iterations: cfg.max_iter,
        residual: res,
    })
}
