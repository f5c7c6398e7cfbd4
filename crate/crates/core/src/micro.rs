//! The ε-scale problem on the perforated box: Stokes flow around the fixed
//! spheres with buoyancy `a θ e3`, and one temperature field that diffuses
//! with conductivity 1 in the fluid and `b (ε/r_ε)^3` in the spheres.

use crate::error::{Error, Result};
use crate::grid::{MacField, PerforatedDomain, ScalarField, SourceSpec};
use crate::linalg::{CsrMatrix, SolverConfig};
use crate::picard;
use crate::stokes::MacStokes;
use crate::thermal::{assemble_operator, solve_operator, thermal_energy, Advection};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Rayleigh number.
    pub a: f64,
    /// Conductivity coefficient of the suspension.
    pub b: f64,
    pub gamma: f64,
    /// Heat source in the fluid.
    pub f: SourceSpec,
    /// Radiant source in the spheres.
    pub g: SourceSpec,
}

impl PhysicalParams {
    /// `a = 0` is admitted as the decoupled limit.
    pub fn validate(&self) -> Result<()> {
        if !(self.a >= 0.0 && self.a.is_finite()) {
            return Err(Error::invalid("a", "must be finite and non-negative"));
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::invalid("b", "must be positive"));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid("gamma", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MicroSolution {
    pub u: MacField,
    pub p: ScalarField,
    pub theta: ScalarField,
    pub picard_iters: usize,
    pub picard_residual: f64,
}

/// Cell conductivities: 1 in the fluid, `b (ε/r_ε)^3` in the spheres.
pub fn conductivity(dom: &PerforatedDomain, b: f64) -> Vec<f64> {
    let ks = dom.conductivity_ratio(b);
    (0..dom.grid().cell_count())
        .map(|c| if dom.is_solid(c) { ks } else { 1.0 })
        .collect()
}

/// `f` on fluid cells and `b (ε/r_ε)^3 g` on solid cells.
pub fn thermal_rhs(dom: &PerforatedDomain, params: &PhysicalParams) -> ScalarField {
    let grid = *dom.grid();
    let ks = dom.conductivity_ratio(params.b);
    let mut rhs = vec![0.0; grid.cell_count()];
    crate::par::fill_indexed(&mut rhs, |c| {
        let x = grid.cell_center(grid.coords(c));
        if dom.is_solid(c) {
            ks * params.g.eval(x)
        } else {
            params.f.eval(x)
        }
    });
    ScalarField::from_values(grid, rhs).expect("sources are finite")
}

fn fluid_mask(dom: &PerforatedDomain) -> Vec<bool> {
    (0..dom.grid().cell_count()).map(|c| !dom.is_solid(c)).collect()
}

pub fn assemble_thermal_micro(
    dom: &PerforatedDomain,
    params: &PhysicalParams,
    u: &MacField,
) -> Result<(CsrMatrix, Vec<f64>)> {
    assemble_thermal_micro_with(dom, params, u, Advection::Upwind)
}

pub fn assemble_thermal_micro_with(
    dom: &PerforatedDomain,
    params: &PhysicalParams,
    u: &MacField,
    scheme: Advection,
) -> Result<(CsrMatrix, Vec<f64>)> {
    params.validate()?;
    let kappa = conductivity(dom, params.b);
    let fluid = fluid_mask(dom);
    let velocity = (u.max_abs() > 0.0).then_some(u);
    let a = assemble_operator(dom.grid(), &kappa, velocity, Some(&fluid), scheme)?;
    let rhs = thermal_rhs(dom, params).values;
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteCoefficient("thermal source"));
    }
    Ok((a, rhs))
}

pub fn solve_thermal_micro(
    dom: &PerforatedDomain,
    params: &PhysicalParams,
    u: &MacField,
    cfg: &SolverConfig,
) -> Result<ScalarField> {
    let (a, rhs) = assemble_thermal_micro(dom, params, u)?;
    let symmetric = u.max_abs() == 0.0;
    ScalarField::from_values(*dom.grid(), solve_operator(&a, &rhs, symmetric, cfg)?)
}

/// Stokes operator with no-slip on the walls and on every solid-cell face.
pub fn perforated_stokes(dom: &PerforatedDomain) -> Result<MacStokes> {
    MacStokes::assemble(*dom.grid(), Some(&dom.solid_mask()), 0.0, [0.0; 3])
}

pub fn solve_stokes_perforated(
    dom: &PerforatedDomain,
    force: &MacField,
    cfg: &SolverConfig,
) -> Result<(MacField, ScalarField)> {
    if !force.grid().same_as(dom.grid()) {
        return Err(Error::GridMismatch("force grid differs from domain grid".into()));
    }
    let sol = perforated_stokes(dom)?.solve(force, cfg, None)?;
    Ok((sol.u, sol.p))
}

/// `|∇θ|²` over the fluid plus `b (ε/r_ε)^3 |∇θ|²` over the spheres, i.e. the
/// conductivity-weighted Dirichlet energy of θ.
pub fn weighted_energy(dom: &PerforatedDomain, theta: &ScalarField, b: f64) -> f64 {
    thermal_energy(theta, &conductivity(dom, b))
}

pub fn picard_micro(
    dom: &PerforatedDomain,
    params: &PhysicalParams,
    cfg: &SolverConfig,
    relax: f64,
    max_outer: usize,
) -> Result<MicroSolution> {
    params.validate()?;
    if (params.gamma - dom.gamma).abs() > 1e-12 * dom.gamma {
        return Err(Error::invalid("gamma", "differs from the domain's gamma"));
    }
    cfg.validate()?;
    picard::validate(relax, max_outer)?;
    let stokes = perforated_stokes(dom)?;
    let linear = cfg.inner();
    let grid = *dom.grid();
    let out = picard::run(
        params.a,
        ScalarField::zeros(grid),
        relax,
        max_outer,
        cfg.rel_tol,
        |force, p0| stokes.solve(force, &linear, p0),
        |u| solve_thermal_micro(dom, params, u, &linear),
    )?;
    Ok(MicroSolution {
        u: out.flow.u,
        p: out.flow.p,
        theta: out.theta,
        picard_iters: out.iterations,
        picard_residual: out.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_perforated_domain, BoxDomain, GridSpec, RRule};

    fn domain(n: usize) -> PerforatedDomain {
        let g = GridSpec::uniform(BoxDomain::unit(), n).unwrap();
        build_perforated_domain(BoxDomain::unit(), 0.5, 1.0, g, RRule::GeometricMean).unwrap()
    }

    fn params(a: f64) -> PhysicalParams {
        PhysicalParams {
            a,
            b: 1.0,
            gamma: 1.0,
            f: SourceSpec::product_sine(1.0, &BoxDomain::unit()),
            g: SourceSpec::gaussian(1.0, [0.5; 3], 0.2),
        }
    }

    #[test]
    fn conductivity_contrast() {
        let dom = domain(16);
        let k = conductivity(&dom, 1.0);
        let centre = dom.grid().index(8, 8, 8);
        assert!(dom.is_solid(centre));
        assert_eq!(k[centre], 64.0);
        assert_eq!(k[0], 1.0);
    }

    #[test]
    fn zero_sources_give_zero_solution() {
        let dom = domain(16);
        let mut p = params(1.0);
        p.f = SourceSpec::zero();
        p.g = SourceSpec::zero();
        let sol = picard_micro(&dom, &p, &SolverConfig::default(), 0.7, 20).unwrap();
        assert_eq!(sol.theta.max_abs(), 0.0);
        assert_eq!(sol.u.max_abs(), 0.0);
    }

    #[test]
    fn decoupled_case_takes_one_iteration() {
        let dom = domain(16);
        let sol = picard_micro(&dom, &params(0.0), &SolverConfig::default(), 0.7, 20).unwrap();
        assert_eq!(sol.picard_iters, 1);
        assert_eq!(sol.u.max_abs(), 0.0);
        assert!(sol.theta.max_abs() > 0.0);
    }

    #[test]
    fn no_slip_on_solid_faces_is_exact() {
        let dom = domain(16);
        let sol = picard_micro(&dom, &params(50.0), &SolverConfig::default(), 0.7, 50).unwrap();
        let g = dom.grid();
        for d in 0..3 {
            for idx in 0..g.face_count(d) {
                let (lo, hi) = g.face_cells(d, g.face_coords(d, idx));
                if lo.is_some_and(|c| dom.is_solid(c)) || hi.is_some_and(|c| dom.is_solid(c)) {
                    assert_eq!(sol.u.comps[d][idx], 0.0);
                }
            }
        }
        assert!(sol.u.max_abs() > 0.0);
        let div = sol.u.divergence();
        let worst = (0..g.cell_count()).filter(|&c| !dom.is_solid(c)).map(|c| div.values[c].abs()).fold(0.0, f64::max);
        assert!(worst < 1e-6 * sol.u.max_abs() / g.max_h(), "{worst}");
    }
}
