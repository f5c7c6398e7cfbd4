//! Relaxed fixed-point loop shared by the micro and macro solvers.

use crate::error::{Error, Result};
use crate::grid::{MacField, ScalarField};
use crate::stokes::{buoyancy_force, StokesSolution};

pub(crate) fn validate(relax: f64, max_outer: usize) -> Result<()> {
    if !(relax > 0.0 && relax <= 1.0) {
        return Err(Error::invalid("relax", "must lie in (0, 1]"));
    }
    if max_outer < 1 {
        return Err(Error::invalid("max_outer", "must be at least 1"));
    }
    Ok(())
}

pub(crate) struct PicardResult {
    pub flow: StokesSolution,
    pub theta: ScalarField,
    pub iterations: usize,
    pub residual: f64,
}

/// Consecutive residual increases tolerated before declaring divergence.
const DIVERGENCE_STREAK: usize = 5;

fn relative_change(new: f64, diff: f64) -> f64 {
    if new > 0.0 {
        diff / new
    } else {
        diff
    }
}

pub(crate) fn run<S, T>(
    a: f64,
    theta0: ScalarField,
    relax: f64,
    max_outer: usize,
    tol: f64,
    mut stokes: S,
    mut thermal: T,
) -> Result<PicardResult>
where
    S: FnMut(&MacField, Option<&[f64]>) -> Result<StokesSolution>,
    T: FnMut(&MacField) -> Result<ScalarField>,
{
    validate(relax, max_outer)?;
    let grid = *theta0.grid();
    let mut theta = theta0;
    let mut u = MacField::zeros(grid);
    let mut p_warm: Option<Vec<f64>> = None;
    let mut last = f64::INFINITY;
    let mut streak = 0;
    for it in 1..=max_outer {
        let force = buoyancy_force(&theta, a);
        let flow = stokes(&force, p_warm.as_deref())?;
        let theta_new = thermal(&flow.u)?;
        if a == 0.0 {
            // decoupled: the thermal solve does not feed back into the flow
            return Ok(PicardResult {
                flow,
                theta: theta_new,
                iterations: 1,
                residual: 0.0,
            });
        }
        let w = relax;
        let mut next = theta_new;
        for (t, old) in next.values.iter_mut().zip(&theta.values) {
            *t = w * *t + (1.0 - w) * old;
        }
        let du = relative_change(flow.u.l2_norm(), flow.u.l2_distance(&u)?);
        let dt = relative_change(next.l2_norm(), next.l2_distance(&theta)?);
        let residual = du.max(dt);
        if !residual.is_finite() {
            return Err(Error::PicardDiverged {
                iterations: it,
                residual,
            });
        }
        streak = if residual > last { streak + 1 } else { 0 };
        if streak >= DIVERGENCE_STREAK {
            return Err(Error::PicardDiverged {
                iterations: it,
                residual,
            });
        }
        last = residual;
        u = flow.u.clone();
        theta = next;
        p_warm = Some(flow.p_dofs.clone());
        if residual < tol {
            return Ok(PicardResult {
                flow,
                theta,
                iterations: it,
                residual,
            });
        }
    }
    Err(Error::MaxIterExceeded {
        iterations: max_outer,
        residual: last,
    })
}
