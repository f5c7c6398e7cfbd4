use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::time::Instant;

use homogenlab::analysis::{
    annulus_capacity, cell_stokes_drag, corrector_energy, micro_macro_errors, run_audit, ConvergenceReport,
    TestFunction,
};
use homogenlab::grid::{build_perforated_domain, MacField, PerforatedDomain, ScalarField};
use homogenlab::homogenized::{closure_residual, picard_macro, MacroSolution};
use homogenlab::io::{write_cell_vector_vtk, write_mac_component_vtk, write_manifest, write_report_csv, write_scalar_vtk, Manifest};
use homogenlab::micro::picard_micro;
use homogenlab::Error;

use crate::config::{ConfigError, RunConfig};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VALIDATION: i32 = 1;
    pub const SOLVER: i32 = 2;
    pub const RESOLUTION: i32 = 3;
    pub const CHECK: i32 = 4;
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl CliError {
    pub fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::new(exit::VALIDATION, e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter { .. }
            | Error::EmptyDomain
            | Error::ZeroGamma
            | Error::DomainError(_)
            | Error::SphereOutOfDomain { .. }
            | Error::GridMismatch(_)
            | Error::DimensionMismatch { .. }
            | Error::Parse(_) => exit::VALIDATION,
            Error::UnresolvedSphere { .. } => exit::RESOLUTION,
            _ => exit::SOLVER,
        };
        CliError::new(code, e.to_string())
    }
}

pub type CmdResult = Result<(), CliError>;

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::new(exit::SOLVER, format!("cannot create {}: {e}", dir.display())))
}

fn write_flow(dir: &Path, u: &MacField, p: &ScalarField) -> Result<(), Error> {
    for (axis, name) in ["u_x", "u_y", "u_z"].iter().enumerate() {
        write_mac_component_vtk(&dir.join(format!("{name}.vtk")), name, u, axis)?;
    }
    write_cell_vector_vtk(&dir.join("u.vtk"), "u", u)?;
    write_scalar_vtk(&dir.join("p.vtk"), "p", p)
}

fn solve_macro(cfg: &RunConfig) -> Result<MacroSolution, Error> {
    picard_macro(cfg.grid(), &cfg.params, &cfg.solver, cfg.relax, cfg.max_outer)
}

fn record_macro(m: &mut Manifest, cfg: &RunConfig, sol: &MacroSolution) {
    let g = ScalarField::sample(cfg.grid(), &cfg.params.g);
    let closure = closure_residual(&sol.theta, &sol.tau, &g, cfg.params.b, cfg.params.gamma);
    m.insert("macro.picard_iters".into(), sol.picard_iters.to_string());
    m.insert("macro.picard_residual".into(), format!("{:e}", sol.picard_residual));
    m.insert("macro.closure_residual".into(), format!("{closure:e}"));
}

pub fn cmd_macro(cfg: &RunConfig) -> CmdResult {
    prepare_dir(&cfg.out_dir)?;
    let sol = solve_macro(cfg)?;
    let dir = &cfg.out_dir;
    write_scalar_vtk(&dir.join("theta.vtk"), "theta", &sol.theta)?;
    write_scalar_vtk(&dir.join("tau.vtk"), "tau", &sol.tau)?;
    write_flow(dir, &sol.u, &sol.p)?;
    let mut m = cfg.manifest();
    m.insert("command".into(), "macro".into());
    record_macro(&mut m, cfg, &sol);
    write_manifest(&dir.join("manifest.txt"), &m)?;
    println!(
        "macro: {} Picard iterations, |theta|={:.6e}, |u|={:.6e}",
        sol.picard_iters,
        sol.theta.l2_norm(),
        sol.u.l2_norm()
    );
    Ok(())
}

fn domain(cfg: &RunConfig, eps: f64) -> Result<PerforatedDomain, CliError> {
    build_perforated_domain(cfg.bx, eps, cfg.params.gamma, cfg.grid(), cfg.r_rule).map_err(|e| match e {
        Error::UnresolvedSphere { min_n, .. } => CliError::new(
            exit::RESOLUTION,
            format!("epsilon {eps} is not resolved: {e}\nsuggested grid.n = {min_n}"),
        ),
        other => other.into(),
    })
}

pub fn cmd_micro(cfg: &RunConfig) -> CmdResult {
    let eps = *cfg
        .epsilon
        .first()
        .ok_or_else(|| CliError::new(exit::VALIDATION, "micro.epsilon is empty"))?;
    let dom = domain(cfg, eps)?;
    prepare_dir(&cfg.out_dir)?;
    let sol = picard_micro(&dom, &cfg.params, &cfg.solver, cfg.relax, cfg.max_outer)?;
    let dir = &cfg.out_dir;
    write_scalar_vtk(&dir.join("theta.vtk"), "theta", &sol.theta)?;
    write_flow(dir, &sol.u, &sol.p)?;
    let phase = ScalarField::from_values(
        *dom.grid(),
        dom.solid_mask().iter().map(|&s| if s { 1.0 } else { 0.0 }).collect(),
    )?;
    write_scalar_vtk(&dir.join("phase.vtk"), "solid", &phase)?;
    let mut m = cfg.manifest();
    m.insert("command".into(), "micro".into());
    m.insert("micro.eps".into(), format!("{eps:e}"));
    m.insert("micro.r_eps".into(), format!("{:e}", dom.r_eps));
    m.insert("micro.big_r".into(), format!("{:e}", dom.big_r));
    m.insert("micro.spheres".into(), dom.sphere_count().to_string());
    m.insert("micro.picard_iters".into(), sol.picard_iters.to_string());
    m.insert("micro.picard_residual".into(), format!("{:e}", sol.picard_residual));
    write_manifest(&dir.join("manifest.txt"), &m)?;
    println!(
        "micro: eps={eps:.6}, {} spheres, {} Picard iterations, |theta|={:.6e}, |u|={:.6e}",
        dom.sphere_count(),
        sol.picard_iters,
        sol.theta.l2_norm(),
        sol.u.l2_norm()
    );
    Ok(())
}

#[cfg(feature = "parallel")]
fn map_points<T: Send, F: Fn(&PerforatedDomain) -> T + Sync + Send>(doms: &[PerforatedDomain], f: F) -> Vec<T> {
    use rayon::prelude::*;
    doms.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_points<T, F: Fn(&PerforatedDomain) -> T>(doms: &[PerforatedDomain], f: F) -> Vec<T> {
    doms.iter().map(f).collect()
}

pub fn cmd_converge(cfg: &RunConfig) -> CmdResult {
    if cfg.epsilon.len() < 2 {
        return Err(CliError::new(exit::VALIDATION, "micro.epsilon needs at least two entries"));
    }
    if cfg.epsilon.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CliError::new(exit::VALIDATION, "micro.epsilon must be strictly decreasing"));
    }
    // resolution failures are reported before any solve
    let doms = cfg.epsilon.iter().map(|&e| domain(cfg, e)).collect::<Result<Vec<_>, _>>()?;
    prepare_dir(&cfg.out_dir)?;
    let start = Instant::now();
    let macro_sol = solve_macro(cfg)?;
    let macro_secs = start.elapsed().as_secs_f64();
    let rows = map_points(&doms, |dom| -> Result<_, Error> {
        let t = Instant::now();
        let micro = picard_micro(dom, &cfg.params, &cfg.solver, cfg.relax, cfg.max_outer)?;
        let mut row = micro_macro_errors(&micro, &macro_sol, dom, cfg.params.b, &TestFunction::STANDARD, cfg.measure)?;
        if cfg.timing {
            row.seconds = t.elapsed().as_secs_f64();
        }
        Ok(row)
    });
    let mut report = ConvergenceReport::default();
    for row in rows {
        report.push(row?);
    }
    write_report_csv(&cfg.out_dir.join("report.csv"), &report)?;
    let decreasing = report.theta_error_decreasing();
    let mut m = cfg.manifest();
    m.insert("command".into(), "converge".into());
    record_macro(&mut m, cfg, &macro_sol);
    if cfg.timing {
        m.insert("macro.seconds".into(), format!("{macro_secs:.3}"));
    }
    m.insert("result.err_theta_decreasing".into(), decreasing.to_string());
    write_manifest(&cfg.out_dir.join("manifest.txt"), &m)?;
    println!("{:>10} {:>12} {:>12} {:>12} {:>12}", "eps", "err_theta", "err_u", "gap_phi2", "picard");
    for r in &report.rows {
        println!(
            "{:>10.6} {:>12.4e} {:>12.4e} {:>12.4e} {:>12}",
            r.eps,
            r.err_theta_l2,
            r.err_u_l2,
            r.gaps.get(1).copied().unwrap_or(f64::NAN),
            r.picard_iters
        );
    }
    if decreasing {
        Ok(())
    } else {
        Err(CliError::new(exit::CHECK, "err_theta_L2 is not strictly decreasing over the sweep"))
    }
}

/// Grid cells per axis for the cell problem of half-width `big_r`.
pub fn cell_grid_n(r: f64, big_r: f64, cells_per_r: f64) -> usize {
    (2.0 * big_r * cells_per_r / r).ceil() as usize
}

pub fn cmd_cell(cfg: &RunConfig, grid_n: Option<usize>) -> CmdResult {
    let c = &cfg.cell;
    if c.big_r.is_empty() {
        return Err(CliError::new(exit::VALIDATION, "cell.big_r is empty"));
    }
    if let Some(&bad) = c.big_r.iter().find(|&&big| !(big > c.r)) {
        return Err(CliError::new(
            exit::VALIDATION,
            format!("invalid config key `cell.big_r`: R = {bad} must exceed r = {}", c.r),
        ));
    }
    if grid_n.is_some() && c.big_r.len() > 1 {
        return Err(CliError::new(exit::VALIDATION, "--grid-n needs a single cell.big_r"));
    }
    println!(
        "{:>8} {:>6} {:>5} {:>14} {:>12} {:>14} {:>14} {:>10}",
        "R", "R/r", "n", "drag", "drag/(6pi r)", "energy", "capacity", "ratio"
    );
    for &big in &c.big_r {
        let energy = corrector_energy(c.r, big, c.quad_points)?;
        let cap = annulus_capacity(c.r, big);
        // the cell problem needs room around the ball
        let drag = if big >= 4.0 * c.r {
            let n = grid_n.unwrap_or_else(|| cell_grid_n(c.r, big, c.cells_per_r));
            Some((n, cell_stokes_drag(c.r, big, n, &cfg.solver)?))
        } else {
            None
        };
        let (n, d, ratio) = match &drag {
            Some((n, d)) => (n.to_string(), format!("{:.6e}", d.drag), format!("{:.6}", d.ratio)),
            None => ("-".into(), "-".into(), "-".into()),
        };
        println!(
            "{big:>8.4} {:>6.2} {n:>5} {d:>14} {ratio:>12} {energy:>14.8e} {cap:>14.8e} {:>10.6}",
            big / c.r,
            energy / cap
        );
    }
    println!("6 pi r = {:.8e}", 6.0 * PI * c.r);
    Ok(())
}

pub fn cmd_audit(cfg: &RunConfig) -> CmdResult {
    let outcomes = run_audit(&cfg.audit)?;
    let mut failed = 0;
    for o in &outcomes {
        println!(
            "{} {:<20} worst={:.6e} {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.worst,
            o.detail
        );
        failed += usize::from(!o.passed);
    }
    if failed == 0 {
        println!("audit: all {} properties hold (seed {})", outcomes.len(), cfg.audit.seed);
        Ok(())
    } else {
        Err(CliError::new(exit::CHECK, format!("audit: {failed} of {} properties failed", outcomes.len())))
    }
}
