//! Sparse matrices and iterative solvers.

mod csr;
mod krylov;
mod uzawa;

pub use csr::CsrMatrix;
pub use krylov::{bicgstab_solve, bicgstab_solve_from, cg_solve, cg_solve_from, SolveOutcome};
pub use uzawa::{uzawa_solve, uzawa_solve_with, SaddleSolution};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preconditioner {
    None,
    #[default]
    Jacobi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_iter: usize,
    pub preconditioner: Preconditioner,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-14,
            max_iter: 20_000,
            preconditioner: Preconditioner::Jacobi,
        }
    }
}

impl SolverConfig {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::invalid("solver.rel_tol", "must be positive"));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::invalid("solver.abs_tol", "must be positive"));
        }
        if self.max_iter < 1 {
            return Err(Error::invalid("solver.max_iter", "must be at least 1"));
        }
        Ok(())
    }

    /// Tolerance used for the inner solves of a nested method.
    pub fn inner(&self) -> Self {
        Self {
            rel_tol: 0.01 * self.rel_tol,
            abs_tol: 0.01 * self.abs_tol,
            ..*self
        }
    }
}
