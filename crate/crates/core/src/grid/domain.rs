use std::f64::consts::PI;

use super::source::dist2;
use super::{BoxDomain, GridSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Fluid,
    Solid,
}

/// How the intermediate radius `R_eps` (with `r_eps << R_eps << eps`) is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RRule {
    /// `sqrt(r_eps * eps)`
    #[default]
    GeometricMean,
    /// `r_eps^(1-t) * eps^t` for `t` in `(0, 1)`; `t = 1/2` is the geometric mean.
    LogInterpolated(f64),
    /// A fixed radius, validated against the same constraints.
    Fixed(f64),
}

impl RRule {
    pub fn radius(&self, r_eps: f64, epsilon: f64) -> f64 {
        match *self {
            RRule::GeometricMean => (r_eps * epsilon).sqrt(),
            RRule::LogInterpolated(t) => r_eps.powf(1.0 - t) * epsilon.powf(t),
            RRule::Fixed(r) => r,
        }
    }
}

pub const NO_SPHERE: u32 = u32::MAX;

/// The box `Omega` with the periodic array of balls `B(eps k, r_eps)` for every
/// period cell `eps k + eps (-1/2, 1/2)^3` contained in `Omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerforatedDomain {
    pub epsilon: f64,
    pub gamma: f64,
    pub r_eps: f64,
    pub big_r: f64,
    pub r_rule: RRule,
    pub lattice: Vec<[i64; 3]>,
    pub centers: Vec<[f64; 3]>,
    grid: GridSpec,
    /// Sphere index per cell, `NO_SPHERE` for fluid cells.
    sphere_of_cell: Vec<u32>,
    /// Number of solid cells per sphere.
    voxels_per_sphere: Vec<usize>,
}

impl PerforatedDomain {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn domain(&self) -> &BoxDomain {
        self.grid.domain()
    }

    pub fn sphere_count(&self) -> usize {
        self.centers.len()
    }

    #[inline]
    pub fn phase(&self, cell: usize) -> Phase {
        if self.sphere_of_cell[cell] == NO_SPHERE {
            Phase::Fluid
        } else {
            Phase::Solid
        }
    }

    #[inline]
    pub fn is_solid(&self, cell: usize) -> bool {
        self.sphere_of_cell[cell] != NO_SPHERE
    }

    /// Sphere owning a solid cell.
    #[inline]
    pub fn sphere_of(&self, cell: usize) -> Option<usize> {
        let s = self.sphere_of_cell[cell];
        (s != NO_SPHERE).then_some(s as usize)
    }

    pub fn solid_mask(&self) -> Vec<bool> {
        self.sphere_of_cell.iter().map(|&s| s != NO_SPHERE).collect()
    }

    pub fn voxels_per_sphere(&self) -> &[usize] {
        &self.voxels_per_sphere
    }

    pub fn solid_cell_count(&self) -> usize {
        self.voxels_per_sphere.iter().sum()
    }

    /// Solid-to-fluid conductivity ratio `b (eps / r_eps)^3`.
    pub fn conductivity_ratio(&self, b: f64) -> f64 {
        b * (self.epsilon / self.r_eps).powi(3)
    }

    /// Period cube `Y_eps^k` of sphere `s` as `(lo, hi)`.
    pub fn period_cell(&self, s: usize) -> ([f64; 3], [f64; 3]) {
        let c = self.centers[s];
        let e = 0.5 * self.epsilon;
        (
            std::array::from_fn(|d| c[d] - e),
            std::array::from_fn(|d| c[d] + e),
        )
    }

    /// Voxelised volume of a phase (cell count times cell volume).
    pub fn voxel_volume(&self, phase: Phase) -> f64 {
        let solid = self.solid_cell_count() as f64 * self.grid.cell_volume();
        match phase {
            Phase::Solid => solid,
            Phase::Fluid => self.grid.cell_count() as f64 * self.grid.cell_volume() - solid,
        }
    }
}

/// Lattice indices `k` with the closed period cube inside the closed box.
fn lattice_range(lo: f64, hi: f64, eps: f64) -> std::ops::RangeInclusive<i64> {
    let slack = 1e-9;
    let first = ((lo + 0.5 * eps) / eps - slack).ceil() as i64;
    let last = ((hi - 0.5 * eps) / eps + slack).floor() as i64;
    first..=last
}

pub fn build_perforated_domain(
    bx: BoxDomain,
    epsilon: f64,
    gamma: f64,
    grid: GridSpec,
    r_rule: RRule,
) -> Result<PerforatedDomain> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::invalid("epsilon", "must be positive"));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::invalid("gamma", "must be positive"));
    }
    if *grid.domain() != bx {
        return Err(Error::GridMismatch("grid does not cover the box".into()));
    }
    for d in 0..3 {
        let ratio = bx.extent(d) / epsilon;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::invalid(
                "epsilon",
                format!("{epsilon} does not divide the box extent {} along axis {d}", bx.extent(d)),
            ));
        }
    }
    let r_eps = gamma * epsilon.powi(3);
    // Open balls of radius eps/2 around lattice points are still disjoint.
    if r_eps > 0.5 * epsilon {
        return Err(Error::invalid(
            "gamma",
            format!("r_eps = gamma eps^3 = {r_eps} exceeds eps/2 = {}", 0.5 * epsilon),
        ));
    }
    let h_max = grid.max_h();
    if r_eps < 2.0 * h_max {
        let ext = (0..3).map(|d| bx.extent(d)).fold(0.0, f64::max);
        return Err(Error::UnresolvedSphere {
            r_eps,
            h_max,
            min_n: (2.0 * ext / r_eps).ceil() as usize,
        });
    }

    let ranges: [_; 3] = std::array::from_fn(|d| lattice_range(bx.lo[d], bx.hi[d], epsilon));
    let mut lattice = Vec::new();
    for k2 in ranges[2].clone() {
        for k1 in ranges[1].clone() {
            for k0 in ranges[0].clone() {
                lattice.push([k0, k1, k2]);
            }
        }
    }
    if lattice.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let centers: Vec<[f64; 3]> = lattice
        .iter()
        .map(|k| std::array::from_fn(|d| k[d] as f64 * epsilon))
        .collect();

    let big_r = r_rule.radius(r_eps, epsilon);
    if !(big_r.is_finite() && big_r > r_eps) {
        return Err(Error::invalid(
            "r_rule",
            format!("R_eps = {big_r} must exceed r_eps = {r_eps}"),
        ));
    }
    // The annuli C(r_eps, R_eps) around distinct centres must not overlap and
    // must stay inside the box. With two or more centres this is R_eps <= eps/2.
    let to_wall = centers
        .iter()
        .flat_map(|c| (0..3).flat_map(move |d| [c[d] - bx.lo[d], bx.hi[d] - c[d]]))
        .fold(f64::INFINITY, f64::min);
    let limit = if centers.len() > 1 {
        (0.5 * epsilon).min(to_wall)
    } else {
        to_wall
    };
    if big_r > limit * (1.0 + 1e-12) {
        return Err(Error::invalid(
            "r_rule",
            format!("R_eps = {big_r} lets neighbouring annuli overlap or leave the box (limit {limit})"),
        ));
    }

    let mut sphere_of_cell = vec![NO_SPHERE; grid.cell_count()];
    let mut voxels_per_sphere = vec![0usize; centers.len()];
    let r2 = r_eps * r_eps;
    for (s, c) in centers.iter().enumerate() {
        let rk: [_; 3] = std::array::from_fn(|d| grid.cell_range(d, c[d] - r_eps, c[d] + r_eps));
        for k in rk[2].clone() {
            for j in rk[1].clone() {
                for i in rk[0].clone() {
                    let x = grid.cell_center([i, j, k]);
                    if dist2(x, *c) < r2 {
                        let idx = grid.index(i, j, k);
                        sphere_of_cell[idx] = s as u32;
                        voxels_per_sphere[s] += 1;
                    }
                }
            }
        }
    }

    Ok(PerforatedDomain {
        epsilon,
        gamma,
        r_eps,
        big_r,
        r_rule,
        lattice,
        centers,
        grid,
        sphere_of_cell,
        voxels_per_sphere,
    })
}

/// Exact volume of a phase: `card(Z_eps) (4 pi / 3) r_eps^3` for the solid,
/// the box volume minus that for the fluid.
pub fn phase_volume(dom: &PerforatedDomain, phase: Phase) -> f64 {
    let solid = dom.sphere_count() as f64 * 4.0 * PI / 3.0 * dom.r_eps.powi(3);
    match phase {
        Phase::Solid => solid,
        Phase::Fluid => dom.domain().volume() - solid,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(eps: f64, gamma: f64, n: usize) -> Result<PerforatedDomain> {
        let bx = BoxDomain::unit();
        build_perforated_domain(bx, eps, gamma, GridSpec::uniform(bx, n)?, RRule::default())
    }

    #[test]
    fn quarter_period_has_27_centres() {
        let d = unit(0.25, 1.0, 128).unwrap();
        assert_eq!(d.sphere_count(), 27);
        assert_eq!(d.r_eps, 1.0 / 64.0);
        for k in &d.lattice {
            assert!(k.iter().all(|&v| (1..=3).contains(&v)));
        }
    }

    #[test]
    fn half_period_has_one_centre() {
        let d = unit(0.5, 1.0, 32).unwrap();
        assert_eq!(d.centers, vec![[0.5, 0.5, 0.5]]);
        assert_eq!(d.r_eps, 0.125);
    }

    #[test]
    fn default_intermediate_radius() {
        let d = unit(0.25, 1.0, 128).unwrap();
        assert!((d.big_r - 1.0 / 16.0).abs() < 1e-15);
        assert!(d.r_eps < d.big_r && d.big_r < 0.125);
    }

    #[test]
    fn unresolved_sphere_reports_minimal_grid() {
        match unit(0.25, 1.0, 64) {
            Err(Error::UnresolvedSphere { min_n, .. }) => assert_eq!(min_n, 128),
            other => panic!("expected UnresolvedSphere, got {other:?}"),
        }
    }

    #[test]
    fn non_dividing_period_rejected() {
        assert!(matches!(
            unit(0.3, 1.0, 64),
            Err(Error::InvalidParameter { name: "epsilon", .. })
        ));
    }

    #[test]
    fn exact_phase_volumes() {
        let d = unit(0.25, 1.0, 128).unwrap();
        let solid = phase_volume(&d, Phase::Solid);
        assert!((solid - 27.0 * 4.0 * PI / 3.0 * (1.0f64 / 64.0).powi(3)).abs() < 1e-18);
        assert!((solid - 4.313e-4).abs() < 1e-6);
        assert!((solid + phase_volume(&d, Phase::Fluid) - 1.0).abs() < 1e-15);
        let d = unit(0.5, 1.0, 32).unwrap();
        assert!((phase_volume(&d, Phase::Solid) - 8.181e-3).abs() < 1e-6);
    }

    #[test]
    fn solid_cells_lie_in_balls() {
        let d = unit(0.5, 1.0, 32).unwrap();
        let g = d.grid();
        for idx in 0..g.cell_count() {
            let x = g.cell_center(g.coords(idx));
            let inside = dist2(x, [0.5; 3]) < d.r_eps * d.r_eps;
            assert_eq!(inside, d.is_solid(idx));
        }
    }

    #[test]
    fn rebuild_is_identical() {
        assert_eq!(unit(0.25, 1.0, 128).unwrap(), unit(0.25, 1.0, 128).unwrap());
    }

    #[test]
    fn voxel_volume_gap_shrinks() {
        // Relative staircase gap shrinks as the grid is refined.
        let gap = |n| {
            let d = unit(0.5, 1.0, n).unwrap();
            let exact = phase_volume(&d, Phase::Solid);
            (d.voxel_volume(Phase::Solid) - exact).abs() / exact
        };
        let coarse = gap(32);
        let fine = gap(128);
        assert!(fine < coarse, "{fine} vs {coarse}");
    }
}
