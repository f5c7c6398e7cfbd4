//! Randomised property checks of the estimates on annuli, period cells and
//! the suspension measure.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::corrector::{annulus_capacity, build_w_eps_field, radial_energy, PiecewiseLinearProfile};
use super::measure::{analytic_mass, ball_mean_defect, mass_deficit, measure_integral, MeasureMode, MeasureWeights};
use super::ratios::inequality_ratios;
use super::sphere::build_tilde_fields;
use crate::error::Result;
use crate::grid::{build_perforated_domain, BoxDomain, GridSpec, PerforatedDomain, RRule, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditConfig {
    pub seed: u64,
    /// Replace the corrector by its square (mutation check).
    pub tamper_corrector: bool,
    /// Grid cells per axis for the ε-sweep properties.
    pub n: usize,
    pub gamma: f64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            seed: 2024,
            tamper_corrector: false,
            n: 64,
            gamma: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the property's statistic.
    pub worst: f64,
    pub detail: String,
}

pub const SWEEP: [f64; 3] = [0.5, 1.0 / 3.0, 0.25];
/// Largest max/min spread accepted for an ε-uniform ratio.
pub const SPREAD_LIMIT: f64 = 10.0;

/// Smooth field vanishing on the box walls: a random sum of sine modes.
pub fn random_smooth_field<R: Rng + ?Sized>(grid: GridSpec, rng: &mut R) -> ScalarField {
    let bx = *grid.domain();
    let modes: Vec<(f64, [f64; 3])> = (0..3)
        .map(|_| {
            (
                rng.random_range(-1.0..1.0),
                std::array::from_fn(|_| rng.random_range(1..=3) as f64),
            )
        })
        .collect();
    ScalarField::from_fn(grid, move |x| {
        modes
            .iter()
            .map(|(a, k)| {
                a * (0..3)
                    .map(|d| (k[d] * std::f64::consts::PI * (x[d] - bx.lo[d]) / bx.extent(d)).sin())
                    .product::<f64>()
            })
            .sum()
    })
}

fn sweep_domains(cfg: &AuditConfig) -> Result<Vec<PerforatedDomain>> {
    let bx = BoxDomain::unit();
    let grid = GridSpec::uniform(bx, cfg.n)?;
    SWEEP
        .iter()
        .map(|&eps| build_perforated_domain(bx, eps, cfg.gamma, grid, RRule::GeometricMean))
        .collect()
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

pub fn capacity_equality(cfg: &AuditConfig, rng: &mut ChaCha8Rng) -> Result<PropertyOutcome> {
    let mut pairs = vec![(1.0, 2.0), (1.0, 10.0), (0.5, 0.75)];
    for _ in 0..5 {
        let r1 = rng.random_range(0.05..2.0);
        pairs.push((r1, r1 * rng.random_range(1.2..50.0)));
    }
    let tamper = cfg.tamper_corrector;
    let mut worst = 0.0f64;
    for (r1, r2) in pairs {
        let w = move |r: f64| {
            let v = r1 / (r2 - r1) * (r2 / r - 1.0);
            if tamper {
                v * v
            } else {
                v
            }
        };
        let e = radial_energy(w, r1, r2, 2000)?;
        worst = worst.max((e / annulus_capacity(r1, r2) - 1.0).abs());
    }
    Ok(PropertyOutcome {
        name: "capacity_equality",
        passed: worst <= 1e-3,
        worst,
        detail: format!("max |E/cap - 1| = {worst:.3e} (limit 1e-3)"),
    })
}

pub fn capacity_inequality(rng: &mut ChaCha8Rng) -> PropertyOutcome {
    let mut worst = f64::INFINITY;
    for _ in 0..20 {
        let p = PiecewiseLinearProfile::random(rng);
        let bound = p.capacity_bound();
        if bound > 0.0 {
            worst = worst.min(p.energy() / bound);
        }
    }
    PropertyOutcome {
        name: "capacity_inequality",
        passed: worst >= 1.0,
        worst,
        detail: format!("min energy/bound over 20 profiles = {worst:.6}"),
    }
}

pub fn average_measure_identity(rng: &mut ChaCha8Rng) -> Result<PropertyOutcome> {
    let bx = BoxDomain::unit();
    let grid = GridSpec::uniform(bx, 96)?;
    let dom = build_perforated_domain(bx, 0.25, 2.0, grid, RRule::GeometricMean)?;
    let w = MeasureWeights::new(&dom, MeasureMode::Analytic);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let theta = random_smooth_field(grid, rng);
        let (tau_t, theta_t) = build_tilde_fields(&theta, &dom);
        for f in [tau_t, theta_t] {
            let sq = ScalarField::from_values(grid, f.values.iter().map(|v| v * v).collect())?;
            let dx = sq.integral();
            let dm = measure_integral(&sq, &w)?;
            if dx > 0.0 {
                worst = worst.max((dx - dm).abs() / dx);
            }
        }
    }
    Ok(PropertyOutcome {
        name: "average_measure_identity",
        passed: worst <= 0.01,
        worst,
        detail: format!("max relative gap between dx and dm integrals = {worst:.3e}"),
    })
}

/// Empirical constants of the period-cell estimates: at each ε the largest
/// ratio over a sample of fields (product-sine, the corrector field `w^ε` and
/// random sine sums). Each sequence of constants must stay within a factor
/// [`SPREAD_LIMIT`] across the sweep.
pub fn average_bounds(cfg: &AuditConfig, rng: &mut ChaCha8Rng) -> Result<[PropertyOutcome; 2]> {
    let doms = sweep_domains(cfg)?;
    let grid = *doms[0].grid();
    let mut shared = vec![super::report::TestFunction::ProductSine.sample(grid)];
    for _ in 0..3 {
        shared.push(random_smooth_field(grid, rng));
    }
    let mut consts = [[0.0f64; 3]; 4];
    for (i, d) in doms.iter().enumerate() {
        let w = build_w_eps_field(d);
        for theta in shared.iter().chain(std::iter::once(&w)) {
            let r = inequality_ratios(theta, d)?;
            for (k, v) in [r.outer_average, r.ball_average, r.average_gap, r.measure_norm].into_iter().enumerate() {
                consts[k][i] = consts[k][i].max(v);
            }
        }
    }
    let spreads: Vec<f64> = consts.iter().map(|c| spread(c)).collect();
    let worst23 = spreads[..3].iter().cloned().fold(0.0, f64::max);
    Ok([
        PropertyOutcome {
            name: "average_bounds",
            passed: worst23 < SPREAD_LIMIT,
            worst: worst23,
            detail: format!(
                "max/min of the constants: outer average {:.3}, ball average {:.3}, average gap {:.3}",
                spreads[0], spreads[1], spreads[2]
            ),
        },
        PropertyOutcome {
            name: "measure_norm_bound",
            passed: spreads[3] < SPREAD_LIMIT,
            worst: spreads[3],
            detail: format!("max/min of the measure-norm constant = {:.3}", spreads[3]),
        },
    ])
}

/// Least-squares slope of `ln y` against `ln x`.
fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// The defect `|φ - φ^ε|_{m_ε}` must trend to zero: positive log-log slope
/// against ε and a last value below the first. Single steps may rise while
/// the sphere lattice is coarse.
pub fn defect_vanishes(cfg: &AuditConfig) -> Result<PropertyOutcome> {
    let doms = sweep_domains(cfg)?;
    let bx = BoxDomain::unit();
    let mut worst = f64::INFINITY;
    let mut ends_lower = true;
    for phi in [super::report::TestFunction::ProductSine, super::report::TestFunction::Gaussian] {
        let defects: Vec<f64> = doms
            .iter()
            .map(|d| ball_mean_defect(|x| phi.eval(&bx, x), d, &MeasureWeights::new(d, MeasureMode::Analytic)))
            .collect();
        worst = worst.min(log_slope(&SWEEP, &defects));
        ends_lower &= defects[defects.len() - 1] < defects[0];
    }
    Ok(PropertyOutcome {
        name: "defect_vanishes",
        passed: worst > 0.0 && ends_lower,
        worst,
        detail: format!("smallest log-log slope of the defect against eps = {worst:.3}; last below first: {ends_lower}"),
    })
}

pub fn mass_bounds(cfg: &AuditConfig) -> Result<PropertyOutcome> {
    let doms = sweep_domains(cfg)?;
    let mut worst = 0.0f64;
    let mut exact = true;
    for d in &doms {
        let one = ScalarField::constant(*d.grid(), 1.0);
        let m = measure_integral(&one, &MeasureWeights::new(d, MeasureMode::Analytic))?;
        exact &= (m - analytic_mass(d)).abs() <= 1e-14 * analytic_mass(d);
        let allowed = 0.5 * d.epsilon * d.domain().surface_area();
        worst = worst.max(mass_deficit(d) / allowed);
    }
    Ok(PropertyOutcome {
        name: "mass_deficit",
        passed: exact && worst <= 1.0,
        worst,
        detail: format!("deficit / (eps/2 * area) <= {worst:.4}; analytic mass exact: {exact}"),
    })
}

/// Runs every property; the order of the returned list is fixed.
pub fn run_audit(cfg: &AuditConfig) -> Result<Vec<PropertyOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = vec![capacity_equality(cfg, &mut rng)?, capacity_inequality(&mut rng), average_measure_identity(&mut rng)?];
    out.extend(average_bounds(cfg, &mut rng)?);
    out.push(defect_vanishes(cfg)?);
    out.push(mass_bounds(cfg)?);
    Ok(out)
}
