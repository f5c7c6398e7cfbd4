use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{PerforatedDomain, ScalarField};

fn check_radii(r1: f64, r2: f64) -> Result<()> {
    if !(r1 > 0.0 && r2 > r1 && r2.is_finite()) {
        return Err(Error::DomainError(format!("need 0 < r1 < r2, got r1={r1}, r2={r2}")));
    }
    Ok(())
}

/// Harmonic profile equal to 1 on `|x| = r1` and 0 on `|x| = r2`.
pub fn corrector_profile(r: f64, r1: f64, r2: f64) -> Result<f64> {
    check_radii(r1, r2)?;
    if !(r >= r1 && r <= r2) {
        return Err(Error::DomainError(format!("r={r} outside [{r1}, {r2}]")));
    }
    Ok(profile(r, r1, r2))
}

#[inline]
fn profile(r: f64, r1: f64, r2: f64) -> f64 {
    r1 / (r2 - r1) * (r2 / r - 1.0)
}

/// `4π r1 r2 / (r2 - r1)`: the capacity of the annulus.
pub fn annulus_capacity(r1: f64, r2: f64) -> f64 {
    4.0 * PI * r1 * r2 / (r2 - r1)
}

/// `∫ |∇w|² dx` over the annulus for a radial profile `w`, using a central
/// difference for `w'` and composite Simpson in `log r` with about `quad_n`
/// nodes.
pub fn radial_energy<F: Fn(f64) -> f64>(w: F, r1: f64, r2: f64, quad_n: usize) -> Result<f64> {
    check_radii(r1, r2)?;
    if quad_n < 3 {
        return Err(Error::DomainError(format!("quad_n={quad_n} is below 3")));
    }
    let intervals = if (quad_n - 1) % 2 == 0 { quad_n - 1 } else { quad_n };
    let (t1, t2) = (r1.ln(), r2.ln());
    let dt = (t2 - t1) / intervals as f64;
    let mut sum = 0.0;
    for i in 0..=intervals {
        let r = (t1 + i as f64 * dt).exp();
        let step = 1e-5 * r;
        let dw = (w(r + step) - w(r - step)) / (2.0 * step);
        // dr = r dt
        let integrand = dw * dw * r * r * r;
        let weight = if i == 0 || i == intervals {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += weight * integrand;
    }
    Ok(4.0 * PI * sum * dt / 3.0)
}

pub fn corrector_energy(r1: f64, r2: f64, quad_n: usize) -> Result<f64> {
    radial_energy(|r| profile(r, r1, r2), r1, r2, quad_n)
}

/// Continuous piecewise-linear radial profile.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearProfile {
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
}

impl PiecewiseLinearProfile {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let r1 = rng.random_range(0.1..2.0);
        let r2 = r1 * rng.random_range(1.1..20.0);
        let pieces = rng.random_range(1..=8);
        let mut inner: Vec<f64> = (0..pieces - 1).map(|_| rng.random_range(r1..r2)).collect();
        inner.sort_by(f64::total_cmp);
        let mut knots = vec![r1];
        knots.extend(inner);
        knots.push(r2);
        let values = knots.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
        Self { knots, values }
    }

    pub fn inner_radius(&self) -> f64 {
        self.knots[0]
    }

    pub fn outer_radius(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    pub fn eval(&self, r: f64) -> f64 {
        let k = &self.knots;
        let i = k.partition_point(|&t| t <= r).clamp(1, k.len() - 1) - 1;
        let s = (r - k[i]) / (k[i + 1] - k[i]);
        self.values[i] + s * (self.values[i + 1] - self.values[i])
    }

    /// Closed-form `4π ∫ w'(r)² r² dr`.
    pub fn energy(&self) -> f64 {
        let k = &self.knots;
        let v = &self.values;
        (0..k.len() - 1)
            .map(|i| {
                if k[i + 1] <= k[i] {
                    return 0.0;
                }
                let slope = (v[i + 1] - v[i]) / (k[i + 1] - k[i]);
                4.0 * PI * slope * slope * (k[i + 1].powi(3) - k[i].powi(3)) / 3.0
            })
            .sum()
    }

    /// Right side of the annulus inequality: capacity times the squared jump
    /// of the boundary averages.
    pub fn capacity_bound(&self) -> f64 {
        let jump = self.values.last().unwrap() - self.values[0];
        annulus_capacity(self.inner_radius(), self.outer_radius()) * jump * jump
    }
}

/// `w^ε`: 1 in the spheres, the harmonic profile in each annulus
/// `r_ε < |x - εk| < R_ε`, 0 elsewhere; sampled at cell centres.
pub fn build_w_eps_field(dom: &PerforatedDomain) -> ScalarField {
    let grid = *dom.grid();
    let (r, big_r) = (dom.r_eps, dom.big_r);
    let mut field = ScalarField::zeros(grid);
    for c in &dom.centers {
        let ranges: [_; 3] = std::array::from_fn(|d| grid.cell_range(d, c[d] - big_r, c[d] + big_r + grid.h()[d]));
        for k in ranges[2].clone() {
            for j in ranges[1].clone() {
                for i in ranges[0].clone() {
                    let x = grid.cell_center([i, j, k]);
                    let dist = (0..3).map(|d| (x[d] - c[d]).powi(2)).sum::<f64>().sqrt();
                    let v = if dist < r {
                        1.0
                    } else if dist <= big_r {
                        profile(dist, r, big_r)
                    } else {
                        continue;
                    };
                    field.values[grid.index(i, j, k)] = v;
                }
            }
        }
    }
    field
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn profile_values() {
        assert_eq!(corrector_profile(1.0, 1.0, 10.0).unwrap(), 1.0);
        assert_eq!(corrector_profile(10.0, 1.0, 10.0).unwrap(), 0.0);
        assert!((corrector_profile(2.0, 1.0, 10.0).unwrap() - 4.0 / 9.0).abs() < 1e-15);
        assert!(corrector_profile(0.5, 1.0, 10.0).is_err());
        assert!(corrector_profile(1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn profile_solves_radial_laplace_bvp() {
        // finite differences for (r² w')' = 0, w(1) = 1, w(10) = 0
        let m = 450;
        let (a, b) = (1.0f64, 10.0f64);
        let h = (b - a) / m as f64;
        let mut lower = vec![0.0; m - 1];
        let mut diag = vec![0.0; m - 1];
        let mut upper = vec![0.0; m - 1];
        let mut rhs = vec![0.0; m - 1];
        for i in 1..m {
            let r = a + i as f64 * h;
            let (rm, rp) = ((r - 0.5 * h).powi(2), (r + 0.5 * h).powi(2));
            lower[i - 1] = rm;
            diag[i - 1] = -(rm + rp);
            upper[i - 1] = rp;
            if i == 1 {
                rhs[0] -= rm;
            }
        }
        // Thomas algorithm
        for i in 1..m - 1 {
            let w = lower[i] / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut x = vec![0.0; m - 1];
        x[m - 2] = rhs[m - 2] / diag[m - 2];
        for i in (0..m - 2).rev() {
            x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
        }
        let i = ((2.0 - a) / h).round() as usize;
        assert!((x[i - 1] - 4.0 / 9.0).abs() < 1e-3);
    }

    #[test]
    fn energy_examples() {
        let e = corrector_energy(1.0, 2.0, 2000).unwrap();
        assert!((e / (8.0 * PI) - 1.0).abs() < 5e-3);
        let far = corrector_energy(1.0, 1e4, 2000).unwrap();
        assert!((far / (4.0 * PI) - 1.0).abs() < 1e-3);
        let e2 = corrector_energy(2.0, 4.0, 2000).unwrap();
        assert!((e2 / e - 2.0).abs() < 1e-9);
    }

    #[test]
    fn piecewise_energy_matches_quadrature() {
        let p = PiecewiseLinearProfile {
            knots: vec![1.0, 3.0],
            values: vec![1.0, 0.0],
        };
        // 4π (1/2)² (27 - 1)/3
        assert!((p.energy() - 4.0 * PI * 0.25 * 26.0 / 3.0).abs() < 1e-12);
        let q = radial_energy(|r| p.eval(r), 1.0, 3.0, 4001).unwrap();
        assert!((q / p.energy() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn annulus_inequality_on_random_profiles() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let p = PiecewiseLinearProfile::random(&mut rng);
            assert!(p.energy() >= p.capacity_bound() * (1.0 - 1e-12));
        }
    }
}
