use std::f64::consts::PI;

use super::measure::{measure_integral, MeasureMode, MeasureWeights};
use super::ratios::{inequality_ratios, InequalityRatios};
use crate::error::{Error, Result};
use crate::grid::{BoxDomain, PerforatedDomain, ScalarField};
use crate::homogenized::MacroSolution;
use crate::micro::{weighted_energy, MicroSolution};

/// Test functions for the weak-star diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestFunction {
    One,
    ProductSine,
    /// Centred Gaussian with width one fifth of the smallest box extent.
    Gaussian,
}

impl TestFunction {
    pub const STANDARD: [TestFunction; 3] = [TestFunction::One, TestFunction::ProductSine, TestFunction::Gaussian];

    pub fn eval(&self, bx: &BoxDomain, x: [f64; 3]) -> f64 {
        match self {
            TestFunction::One => 1.0,
            TestFunction::ProductSine => (0..3).map(|d| (PI * (x[d] - bx.lo[d]) / bx.extent(d)).sin()).product(),
            TestFunction::Gaussian => {
                let c = bx.center();
                let w = 0.2 * (0..3).map(|d| bx.extent(d)).fold(f64::INFINITY, f64::min);
                let d2: f64 = (0..3).map(|d| (x[d] - c[d]).powi(2)).sum();
                (-d2 / (2.0 * w * w)).exp()
            }
        }
    }

    pub fn sample(&self, grid: crate::grid::GridSpec) -> ScalarField {
        let bx = *grid.domain();
        ScalarField::from_fn(grid, |x| self.eval(&bx, x))
    }
}

/// One ε of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub r_eps: f64,
    pub n: usize,
    pub err_theta_l2: f64,
    pub err_u_l2: f64,
    /// `|∫θ^ε φ dm_ε - ∫τ φ dx|` per test function.
    pub gaps: Vec<f64>,
    pub ratios: InequalityRatios,
    pub picard_iters: usize,
    pub seconds: f64,
    /// `|∇θ^ε|²` over the fluid plus `b(ε/r_ε)^3 |∇θ^ε|²` over the spheres.
    pub energy: f64,
}

/// Rows sorted by decreasing ε.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn push(&mut self, row: ConvergenceRow) {
        self.rows.push(row);
        self.rows.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    }

    pub fn theta_error_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].err_theta_l2 < w[0].err_theta_l2)
    }
}

/// Measure gap `|∫θ^ε φ dm_ε - ∫τ φ dx|` for one test function.
pub fn measure_gap(theta_micro: &ScalarField, tau: &ScalarField, phi: &ScalarField, w: &MeasureWeights) -> Result<f64> {
    let weighted = ScalarField::from_values(
        *theta_micro.grid(),
        theta_micro.values.iter().zip(&phi.values).map(|(t, p)| t * p).collect(),
    )?;
    let lhs = measure_integral(&weighted, w)?;
    let vol = tau.grid().cell_volume();
    let rhs: f64 = tau.values.iter().zip(&phi.values).map(|(t, p)| t * p).sum::<f64>() * vol;
    Ok((lhs - rhs).abs())
}

/// Compares a micro and a macro solution on the same grid. `seconds` and
/// `picard_iters` are left for the caller to fill.
pub fn micro_macro_errors(
    micro: &MicroSolution,
    macro_sol: &MacroSolution,
    dom: &PerforatedDomain,
    b: f64,
    test_functions: &[TestFunction],
    mode: MeasureMode,
) -> Result<ConvergenceRow> {
    let grid = dom.grid();
    if !micro.theta.grid().same_as(grid) || !macro_sol.theta.grid().same_as(grid) {
        return Err(Error::GridMismatch("micro and macro solutions must share the domain grid".into()));
    }
    let err_theta_l2 = micro.theta.l2_distance(&macro_sol.theta)?;
    let err_u_l2 = micro.u.l2_distance(&macro_sol.u)?;
    let w = MeasureWeights::new(dom, mode);
    let gaps = test_functions
        .iter()
        .map(|phi| measure_gap(&micro.theta, &macro_sol.tau, &phi.sample(*grid), &w))
        .collect::<Result<Vec<_>>>()?;
    let ratios = match inequality_ratios(&micro.theta, dom) {
        Ok(r) => r,
        Err(Error::ZeroGradient) => InequalityRatios {
            outer_average: f64::NAN,
            ball_average: f64::NAN,
            average_gap: f64::NAN,
            measure_norm: f64::NAN,
        },
        Err(e) => return Err(e),
    };
    Ok(ConvergenceRow {
        eps: dom.epsilon,
        r_eps: dom.r_eps,
        n: grid.n()[0],
        err_theta_l2,
        err_u_l2,
        gaps,
        ratios,
        picard_iters: micro.picard_iters.max(macro_sol.picard_iters),
        seconds: 0.0,
        energy: weighted_energy(dom, &micro.theta, b),
    })
}
