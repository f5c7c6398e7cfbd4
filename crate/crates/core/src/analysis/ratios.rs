use super::measure::{measure_integral, MeasureMode, MeasureWeights};
use super::sphere::{build_tilde_fields, sphere_averages};
use crate::error::{Error, Result};
use crate::grid::{PerforatedDomain, ScalarField};

/// `|∇θ|²` per cell from central differences; the wall neighbour is the
/// ghost value `-θ` that puts θ = 0 on the boundary face.
pub fn cell_gradient_sq(theta: &ScalarField) -> Vec<f64> {
    let g = *theta.grid();
    let n = g.n();
    let h = g.h();
    let t = &theta.values;
    let mut out = vec![0.0; g.cell_count()];
    crate::par::fill_indexed(&mut out, |row| {
        let c = g.coords(row);
        let mut acc = 0.0;
        for d in 0..3 {
            let mut lo = c;
            let mut hi = c;
            let below = if c[d] == 0 {
                -t[row]
            } else {
                lo[d] -= 1;
                t[g.index(lo[0], lo[1], lo[2])]
            };
            let above = if c[d] + 1 == n[d] {
                -t[row]
            } else {
                hi[d] += 1;
                t[g.index(hi[0], hi[1], hi[2])]
            };
            let dd = (above - below) / (2.0 * h[d]);
            acc += dd * dd;
        }
        acc
    });
    out
}

/// Region of a cell relative to the nearest sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Region {
    Ball,
    Annulus,
    Outside,
}

fn regions(dom: &PerforatedDomain) -> Vec<Region> {
    let grid = *dom.grid();
    let mut out = vec![Region::Outside; grid.cell_count()];
    for c in 0..grid.cell_count() {
        if dom.is_solid(c) {
            out[c] = Region::Ball;
        }
    }
    let big_r = dom.big_r;
    for center in &dom.centers {
        let ranges: [_; 3] = std::array::from_fn(|d| grid.cell_range(d, center[d] - big_r, center[d] + big_r + grid.h()[d]));
        for k in ranges[2].clone() {
            for j in ranges[1].clone() {
                for i in ranges[0].clone() {
                    let idx = grid.index(i, j, k);
                    let x = grid.cell_center([i, j, k]);
                    let d2: f64 = (0..3).map(|d| (x[d] - center[d]).powi(2)).sum();
                    if out[idx] == Region::Outside && d2 < big_r * big_r {
                        out[idx] = Region::Annulus;
                    }
                }
            }
        }
    }
    out
}

/// Left side over right-side scaling for each estimate; bounded ratios
/// across an ε-sweep are what the estimates assert.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityRatios {
    /// `∫|θ - θ̃|² / ((ε³/R_ε) ∫_Ω |∇θ|²)`
    pub outer_average: f64,
    /// `∫_T |θ - τ̃|² / (r_ε² ∫_T |∇θ|²)`
    pub ball_average: f64,
    /// `∫|θ̃ - τ̃|² / ((ε³/r_ε) ∫_C |∇θ|²)`
    pub average_gap: f64,
    /// `∫θ² dm_ε / (max(1, ε³/r_ε) ∫_Ω |∇θ|²)`
    pub measure_norm: f64,
}

pub fn inequality_ratios(theta: &ScalarField, dom: &PerforatedDomain) -> Result<InequalityRatios> {
    inequality_ratios_with(theta, dom, MeasureMode::Voxel)
}

pub fn inequality_ratios_with(theta: &ScalarField, dom: &PerforatedDomain, mode: MeasureMode) -> Result<InequalityRatios> {
    if !theta.grid().same_as(dom.grid()) {
        return Err(Error::GridMismatch("field grid differs from domain grid".into()));
    }
    let vol = dom.grid().cell_volume();
    let grad = cell_gradient_sq(theta);
    let region = regions(dom);
    let sum_where = |pred: &dyn Fn(Region) -> bool| -> f64 {
        grad.iter().zip(&region).filter(|(_, r)| pred(**r)).map(|(g, _)| g).sum::<f64>() * vol
    };
    let grad_all = grad.iter().sum::<f64>() * vol;
    if grad_all == 0.0 {
        return Err(Error::ZeroGradient);
    }
    let grad_ball = sum_where(&|r| r == Region::Ball);
    let grad_annulus = sum_where(&|r| r == Region::Annulus);
    let (eps, r, big_r) = (dom.epsilon, dom.r_eps, dom.big_r);
    let (tau_t, theta_t) = build_tilde_fields(theta, dom);

    let sq_dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>() * vol;
    let lhs_outer = sq_dist(&theta.values, &theta_t.values);
    let lhs_gap = sq_dist(&theta_t.values, &tau_t.values);

    let inner = sphere_averages(theta, dom, r);
    let lhs_ball = (0..theta.values.len())
        .filter_map(|c| dom.sphere_of(c).map(|s| (theta.values[c] - inner[s]).powi(2)))
        .sum::<f64>()
        * vol;

    let w = MeasureWeights::new(dom, mode);
    let sq = ScalarField::from_values(*theta.grid(), theta.values.iter().map(|v| v * v).collect())?;
    let lhs_measure = measure_integral(&sq, &w)?;

    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { f64::INFINITY };
    Ok(InequalityRatios {
        outer_average: ratio(lhs_outer, eps.powi(3) / big_r * grad_all),
        ball_average: ratio(lhs_ball, r * r * grad_ball),
        average_gap: ratio(lhs_gap, eps.powi(3) / r * grad_annulus),
        measure_norm: ratio(lhs_measure, (eps.powi(3) / r).max(1.0) * grad_all),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_perforated_domain, BoxDomain, GridSpec, RRule};

    #[test]
    fn gradient_of_linear_field_in_the_interior() {
        let g = GridSpec::uniform(BoxDomain::unit(), 8).unwrap();
        let t = ScalarField::from_fn(g, |x| 2.0 * x[0] - x[2]);
        let gs = cell_gradient_sq(&t);
        assert!((gs[g.index(3, 4, 5)] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn zero_field_has_no_ratios() {
        let g = GridSpec::uniform(BoxDomain::unit(), 16).unwrap();
        let d = build_perforated_domain(BoxDomain::unit(), 0.5, 1.0, g, RRule::GeometricMean).unwrap();
        assert_eq!(inequality_ratios(&ScalarField::zeros(g), &d).unwrap_err(), Error::ZeroGradient);
    }
}
