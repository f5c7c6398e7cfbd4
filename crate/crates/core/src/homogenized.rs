//! The limit problem on the unperforated box:
//!
//! ```text
//! -Δu + 6πγ u + ∇p = a θ e3,   div u = 0
//! u·∇θ - Δθ + 4πγ (θ - τ) = f
//! γ (τ - θ) = (b/3) g
//! ```
//!
//! τ is eliminated pointwise, leaving `u·∇θ - Δθ = f + (4πb/3) g`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, MacField, ScalarField};
use crate::linalg::{bicgstab_solve, CsrMatrix, SolverConfig};
use crate::micro::PhysicalParams;
use crate::picard;
use crate::stokes::MacStokes;
use crate::thermal::{assemble_operator, solve_operator, Advection};

/// Brinkman drag per unit capacity: the zeroth-order term is `BRINKMAN * γ`.
pub const BRINKMAN: f64 = 6.0 * PI;
/// Heat exchange per unit capacity: the exchange term is `EXCHANGE * γ`.
pub const EXCHANGE: f64 = 4.0 * PI;

#[derive(Debug, Clone, PartialEq)]
pub struct MacroSolution {
    pub u: MacField,
    pub p: ScalarField,
    pub theta: ScalarField,
    pub tau: ScalarField,
    pub picard_iters: usize,
    pub picard_residual: f64,
}

pub fn brinkman_operator(grid: GridSpec, gamma: f64) -> Result<MacStokes> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::invalid("gamma", "must be finite and non-negative"));
    }
    MacStokes::assemble(grid, None, BRINKMAN * gamma, [0.0; 3])
}

pub fn solve_brinkman(
    grid: GridSpec,
    gamma: f64,
    force: &MacField,
    cfg: &SolverConfig,
) -> Result<(MacField, ScalarField)> {
    if !force.grid().same_as(&grid) {
        return Err(Error::GridMismatch("force grid differs from solve grid".into()));
    }
    let sol = brinkman_operator(grid, gamma)?.solve(force, cfg, None)?;
    Ok((sol.u, sol.p))
}

/// Right-hand side of the reduced heat equation, `f + (4πb/3) g`.
pub fn reduced_source(grid: GridSpec, params: &PhysicalParams) -> ScalarField {
    let c = EXCHANGE * params.b / 3.0;
    ScalarField::from_fn(grid, |x| params.f.eval(x) + c * params.g.eval(x))
}

pub fn solve_macro_thermal(
    grid: GridSpec,
    params: &PhysicalParams,
    u: &MacField,
    cfg: &SolverConfig,
) -> Result<ScalarField> {
    params.validate()?;
    let rhs = reduced_source(grid, params);
    solve_reduced(grid, &rhs.values, u, cfg)
}

fn solve_reduced(grid: GridSpec, rhs: &[f64], u: &MacField, cfg: &SolverConfig) -> Result<ScalarField> {
    let kappa = vec![1.0; grid.cell_count()];
    let moving = u.max_abs() > 0.0;
    let a = assemble_operator(&grid, &kappa, moving.then_some(u), None, Advection::Upwind)?;
    ScalarField::from_values(grid, solve_operator(&a, rhs, !moving, cfg)?)
}

/// `τ = θ + b g / (3γ)`.
pub fn tau_from_theta(theta: &ScalarField, g: &ScalarField, b: f64, gamma: f64) -> Result<ScalarField> {
    if gamma == 0.0 {
        return Err(Error::ZeroGamma);
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::invalid("gamma", "must be positive"));
    }
    if !theta.grid().same_as(g.grid()) {
        return Err(Error::GridMismatch("theta and g live on different grids".into()));
    }
    let c = b / (3.0 * gamma);
    let values = theta.values.iter().zip(&g.values).map(|(t, gv)| t + c * gv).collect();
    ScalarField::from_values(*theta.grid(), values)
}

/// Largest cell value of `|4πγ(τ - θ) - (4πb/3) g|`.
pub fn closure_residual(theta: &ScalarField, tau: &ScalarField, g: &ScalarField, b: f64, gamma: f64) -> f64 {
    theta
        .values
        .iter()
        .zip(&tau.values)
        .zip(&g.values)
        .map(|((t, ta), gv)| (EXCHANGE * gamma * (ta - t) - EXCHANGE * b / 3.0 * gv).abs())
        .fold(0.0, f64::max)
}

pub fn picard_macro(
    grid: GridSpec,
    params: &PhysicalParams,
    cfg: &SolverConfig,
    relax: f64,
    max_outer: usize,
) -> Result<MacroSolution> {
    picard_macro_from(grid, params, cfg, relax, max_outer, None)
}

/// As [`picard_macro`], starting from `theta0` instead of zero.
pub fn picard_macro_from(
    grid: GridSpec,
    params: &PhysicalParams,
    cfg: &SolverConfig,
    relax: f64,
    max_outer: usize,
    theta0: Option<&ScalarField>,
) -> Result<MacroSolution> {
    params.validate()?;
    cfg.validate()?;
    picard::validate(relax, max_outer)?;
    let brinkman = brinkman_operator(grid, params.gamma)?;
    let rhs = reduced_source(grid, params);
    let linear = cfg.inner();
    let start = match theta0 {
        Some(t) if t.grid().same_as(&grid) => t.clone(),
        Some(_) => return Err(Error::GridMismatch("initial temperature grid".into())),
        None => ScalarField::zeros(grid),
    };
    let out = picard::run(
        params.a,
        start,
        relax,
        max_outer,
        cfg.rel_tol,
        |force, p0| brinkman.solve(force, &linear, p0),
        |u| solve_reduced(grid, &rhs.values, u, &linear),
    )?;
    let g = ScalarField::sample(grid, &params.g);
    let tau = tau_from_theta(&out.theta, &g, params.b, params.gamma)?;
    Ok(MacroSolution {
        u: out.flow.u,
        p: out.flow.p,
        theta: out.theta,
        tau,
        picard_iters: out.iterations,
        picard_residual: out.residual,
    })
}

/// Debug path: solves the heat equations for `(θ, τ)` as one block system
/// without eliminating τ. Returns `(θ, τ)`.
pub fn solve_macro_thermal_block(
    grid: GridSpec,
    params: &PhysicalParams,
    u: &MacField,
    cfg: &SolverConfig,
) -> Result<(ScalarField, ScalarField)> {
    params.validate()?;
    let nc = grid.cell_count();
    let kappa = vec![1.0; nc];
    let moving = u.max_abs() > 0.0;
    let l = assemble_operator(&grid, &kappa, moving.then_some(u), None, Advection::Upwind)?;
    let k = EXCHANGE * params.gamma;
    let a = CsrMatrix::from_row_fn(2 * nc, 2 * nc, |row, entries| {
        if row < nc {
            for (c, v) in l.row(row) {
                entries.push((c, v));
            }
            entries.push((row, k));
            entries.push((row + nc, -k));
        } else {
            entries.push((row - nc, -k));
            entries.push((row, k));
        }
    })?;
    let mut rhs = vec![0.0; 2 * nc];
    for c in 0..nc {
        let x = grid.cell_center(grid.coords(c));
        rhs[c] = params.f.eval(x);
        rhs[nc + c] = EXCHANGE * params.b / 3.0 * params.g.eval(x);
    }
    let sol = bicgstab_solve(&a, &rhs, cfg)?.solution;
    Ok((
        ScalarField::from_values(grid, sol[..nc].to_vec())?,
        ScalarField::from_values(grid, sol[nc..].to_vec())?,
    ))
}

/// Closed-form temperature used for manufactured-solution checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExactTemperature {
    Zero,
    /// `amplitude * Π sin(π (x_i - lo_i) / L_i)` on the grid's box.
    ProductSine { amplitude: f64 },
}

impl ExactTemperature {
    fn value_and_laplacian(&self, grid: &GridSpec, x: [f64; 3]) -> (f64, f64) {
        match *self {
            ExactTemperature::Zero => (0.0, 0.0),
            ExactTemperature::ProductSine { amplitude } => {
                let bx = grid.domain();
                let mut v = amplitude;
                let mut k2 = 0.0;
                for d in 0..3 {
                    let k = PI / bx.extent(d);
                    v *= (k * (x[d] - bx.lo[d])).sin();
                    k2 += k * k;
                }
                (v, -k2 * v)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedErrors {
    pub l2: f64,
    pub max: f64,
}

/// Solves the reduced heat equation with `u = 0` and the fluid source chosen so
/// that `exact` is the solution; returns the discrete errors.
pub fn manufactured_residual(
    grid: GridSpec,
    params: &PhysicalParams,
    exact: ExactTemperature,
    cfg: &SolverConfig,
) -> Result<ManufacturedErrors> {
    params.validate()?;
    let c = EXCHANGE * params.b / 3.0;
    // -Δθ = f + c g  =>  f = -Δθ - c g, so the total source is -Δθ
    let rhs = ScalarField::from_fn(grid, |x| {
        let (_, lap) = exact.value_and_laplacian(&grid, x);
        let f = -lap - c * params.g.eval(x);
        f + c * params.g.eval(x)
    });
    let theta = solve_reduced(grid, &rhs.values, &MacField::zeros(grid), cfg)?;
    let reference = ScalarField::from_fn(grid, |x| exact.value_and_laplacian(&grid, x).0);
    Ok(ManufacturedErrors {
        l2: theta.l2_distance(&reference)?,
        max: theta
            .values
            .iter()
            .zip(&reference.values)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BoxDomain, SourceSpec};

    fn params() -> PhysicalParams {
        PhysicalParams {
            a: 0.0,
            b: 3.0,
            gamma: 2.0,
            f: SourceSpec::product_sine(1.0, &BoxDomain::unit()),
            g: SourceSpec::gaussian(1.0, [0.5; 3], 0.15),
        }
    }

    #[test]
    fn tau_examples() {
        let g = GridSpec::uniform(BoxDomain::unit(), 4).unwrap();
        let t = tau_from_theta(&ScalarField::zeros(g), &ScalarField::constant(g, 1.0), 3.0, 1.0).unwrap();
        assert!(t.values.iter().all(|&v| v == 1.0));
        let t = tau_from_theta(&ScalarField::constant(g, 1.0), &ScalarField::constant(g, 4.0), 3.0, 2.0).unwrap();
        assert!(t.values.iter().all(|&v| v == 3.0));
        assert_eq!(
            tau_from_theta(&ScalarField::zeros(g), &ScalarField::zeros(g), 1.0, 0.0).unwrap_err(),
            Error::ZeroGamma
        );
    }

    #[test]
    fn folded_source_gives_identical_temperature() {
        let grid = GridSpec::uniform(BoxDomain::unit(), 8).unwrap();
        let p = params();
        let u = MacField::zeros(grid);
        let cfg = SolverConfig::default();
        let t1 = solve_macro_thermal(grid, &p, &u, &cfg).unwrap();
        // f' = f + (4πb/3) g with g = 0, evaluated the same way
        let folded = reduced_source(grid, &p);
        let t2 = solve_reduced(grid, &folded.values, &u, &cfg).unwrap();
        assert_eq!(t1.values, t2.values);
    }

    #[test]
    fn block_and_reduced_forms_agree() {
        let grid = GridSpec::uniform(BoxDomain::unit(), 8).unwrap();
        let p = params();
        let u = MacField::zeros(grid);
        let cfg = SolverConfig::default().with_rel_tol(1e-11);
        let theta = solve_macro_thermal(grid, &p, &u, &cfg).unwrap();
        let (tb, taub) = solve_macro_thermal_block(grid, &p, &u, &cfg).unwrap();
        let scale = theta.max_abs();
        assert!(theta.l2_distance(&tb).unwrap() <= 1e-8 * scale);
        let g = ScalarField::sample(grid, &p.g);
        let tau = tau_from_theta(&theta, &g, p.b, p.gamma).unwrap();
        assert!(tau.l2_distance(&taub).unwrap() <= 1e-8 * tau.max_abs());
    }

    #[test]
    fn zero_exact_field_has_zero_error() {
        let grid = GridSpec::uniform(BoxDomain::unit(), 8).unwrap();
        let mut p = params();
        p.g = SourceSpec::zero();
        let e = manufactured_residual(grid, &p, ExactTemperature::Zero, &SolverConfig::default()).unwrap();
        assert_eq!((e.l2, e.max), (0.0, 0.0));
    }
}
