use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{PerforatedDomain, ScalarField};

/// Minimum number of polar nodes; the azimuthal count is twice the polar one.
pub const MIN_QUAD_ORDER: usize = 16;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Mean of the trilinearly interpolated field over the sphere `|x - c| = radius`,
/// with Gauss–Legendre in `cos θ` and a uniform rule in `φ`.
pub fn sphere_surface_average(field: &ScalarField, center: [f64; 3], radius: f64, quad_order: usize) -> Result<f64> {
    let bx = field.grid().domain();
    let inside = radius > 0.0 && (0..3).all(|d| center[d] - radius >= bx.lo[d] && center[d] + radius <= bx.hi[d]);
    if !inside {
        return Err(Error::SphereOutOfDomain { center, radius });
    }
    Ok(sphere_average_unchecked(field, center, radius, quad_order))
}

pub(crate) fn sphere_average_unchecked(field: &ScalarField, center: [f64; 3], radius: f64, quad_order: usize) -> f64 {
    let nt = quad_order.max(MIN_QUAD_ORDER);
    let np = 2 * nt;
    let (mu, w) = gauss_legendre(nt);
    let mut total = 0.0;
    for (&m, &wt) in mu.iter().zip(&w) {
        let s = (1.0 - m * m).sqrt();
        let mut ring = 0.0;
        for j in 0..np {
            let phi = 2.0 * PI * (j as f64 + 0.5) / np as f64;
            let x = [
                center[0] + radius * s * phi.cos(),
                center[1] + radius * s * phi.sin(),
                center[2] + radius * m,
            ];
            ring += field.interpolate(x);
        }
        total += 0.5 * wt * ring / np as f64;
    }
    total
}

/// Cell-index ranges covering the period cube of sphere `s`.
pub(crate) fn period_cells(dom: &PerforatedDomain, s: usize) -> [std::ops::Range<usize>; 3] {
    let (lo, hi) = dom.period_cell(s);
    std::array::from_fn(|d| dom.grid().cell_range(d, lo[d], hi[d]))
}

/// Fills each period cube with a per-sphere constant, zero elsewhere.
pub(crate) fn piecewise_constant(dom: &PerforatedDomain, values: &[f64]) -> ScalarField {
    let grid = *dom.grid();
    let mut out = ScalarField::zeros(grid);
    for (s, &v) in values.iter().enumerate() {
        let [ri, rj, rk] = period_cells(dom, s);
        for k in rk {
            for j in rj.clone() {
                for i in ri.clone() {
                    out.values[grid.index(i, j, k)] = v;
                }
            }
        }
    }
    out
}

/// Per-sphere averages of `theta` on the spheres of radius `radius`.
pub fn sphere_averages(theta: &ScalarField, dom: &PerforatedDomain, radius: f64) -> Vec<f64> {
    crate::par::map_jobs(&dom.centers, |c| sphere_average_unchecked(theta, *c, radius, MIN_QUAD_ORDER))
}

/// `(τ̃, θ̃)`: per period cube, the average of θ over the sphere of radius
/// `r_ε` (for τ̃) and `R_ε` (for θ̃).
pub fn build_tilde_fields(theta: &ScalarField, dom: &PerforatedDomain) -> (ScalarField, ScalarField) {
    let inner = sphere_averages(theta, dom, dom.r_eps);
    let outer = sphere_averages(theta, dom, dom.big_r);
    (piecewise_constant(dom, &inner), piecewise_constant(dom, &outer))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BoxDomain, GridSpec};

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((m4 - 0.4).abs() < 1e-14);
        let (x3, w3) = gauss_legendre(3);
        assert!((x3[0] - (0.6f64).sqrt()).abs() < 1e-14);
        assert!((w3[1] - 8.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn averages_of_simple_fields() {
        let g = GridSpec::uniform(BoxDomain::unit(), 32).unwrap();
        let c = [0.45, 0.5, 0.55];
        let constant = ScalarField::constant(g, 2.5);
        assert!((sphere_surface_average(&constant, c, 0.2, 16).unwrap() - 2.5).abs() < 1e-14);
        let x1 = ScalarField::from_fn(g, |x| x[0]);
        assert!((sphere_surface_average(&x1, c, 0.2, 16).unwrap() - 0.45).abs() < 1e-12);
        let r2 = ScalarField::from_fn(g, |x| (0..3).map(|d| (x[d] - c[d]).powi(2)).sum());
        let avg = sphere_surface_average(&r2, c, 0.2, 16).unwrap();
        // trilinear interpolation of a quadratic overshoots by at most h²/4 per axis
        assert!((avg - 0.04).abs() < 3.0 * (1.0f64 / 32.0).powi(2) / 4.0, "{avg}");
    }

    #[test]
    fn sphere_leaving_box_is_rejected() {
        let g = GridSpec::uniform(BoxDomain::unit(), 8).unwrap();
        let f = ScalarField::zeros(g);
        assert!(matches!(
            sphere_surface_average(&f, [0.1, 0.5, 0.5], 0.2, 16),
            Err(Error::SphereOutOfDomain { .. })
        ));
    }
}
