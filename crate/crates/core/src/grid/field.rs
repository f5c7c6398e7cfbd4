use super::{GridSpec, SourceSpec};
use crate::error::{Error, Result};
use crate::par;

/// One value per cell centre.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    pub values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            values: vec![0.0; grid.cell_count()],
            grid,
        }
    }

    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cell_count() {
            return Err(Error::DimensionMismatch {
                expected: grid.cell_count(),
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteCoefficient("scalar field"));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F>(grid: GridSpec, f: F) -> Self
    where
        F: Fn([f64; 3]) -> f64 + Sync + Send,
    {
        let mut values = vec![0.0; grid.cell_count()];
        par::fill_indexed(&mut values, |idx| f(grid.cell_center(grid.coords(idx))));
        Self { grid, values }
    }

    pub fn sample(grid: GridSpec, s: &SourceSpec) -> Self {
        Self::from_fn(grid, |x| s.eval(x))
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        Self {
            values: vec![c; grid.cell_count()],
            grid,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn at(&self, c: [usize; 3]) -> f64 {
        self.values[self.grid.index(c[0], c[1], c[2])]
    }

    /// Discrete `L^2(Omega)` norm (midpoint rule).
    pub fn l2_norm(&self) -> f64 {
        (par::dot(&self.values, &self.values) * self.grid.cell_volume()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Midpoint-rule integral over the box.
    pub fn integral(&self) -> f64 {
        par::sum_indexed(self.values.len(), |i| self.values[i]) * self.grid.cell_volume()
    }

    pub fn l2_distance(&self, other: &ScalarField) -> Result<f64> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch("scalar fields on different grids".into()));
        }
        let s = par::sum_indexed(self.values.len(), |i| {
            let d = self.values[i] - other.values[i];
            d * d
        });
        Ok((s * self.grid.cell_volume()).sqrt())
    }

    /// Trilinear interpolation between cell centres; constant extrapolation in
    /// the half cell next to the boundary.
    pub fn interpolate(&self, x: [f64; 3]) -> f64 {
        let g = &self.grid;
        let n = g.n();
        let h = g.h();
        let lo = g.domain().lo;
        let mut i0 = [0usize; 3];
        let mut t = [0.0f64; 3];
        for d in 0..3 {
            let s = (x[d] - lo[d]) / h[d] - 0.5;
            let base = s.floor().clamp(0.0, (n[d] - 2) as f64);
            i0[d] = base as usize;
            t[d] = (s - base).clamp(0.0, 1.0);
        }
        let mut acc = 0.0;
        for dz in 0..2 {
            let wz = if dz == 0 { 1.0 - t[2] } else { t[2] };
            for dy in 0..2 {
                let wy = if dy == 0 { 1.0 - t[1] } else { t[1] };
                for dx in 0..2 {
                    let wx = if dx == 0 { 1.0 - t[0] } else { t[0] };
                    acc += wx * wy * wz * self.at([i0[0] + dx, i0[1] + dy, i0[2] + dz]);
                }
            }
        }
        acc
    }
}

/// Face-normal velocity components on the MAC staggering: component `d`
/// lives on the faces normal to axis `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct MacField {
    grid: GridSpec,
    pub comps: [Vec<f64>; 3],
}

impl MacField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            comps: std::array::from_fn(|d| vec![0.0; grid.face_count(d)]),
            grid,
        }
    }

    pub fn from_components(grid: GridSpec, comps: [Vec<f64>; 3]) -> Result<Self> {
        for (d, c) in comps.iter().enumerate() {
            if c.len() != grid.face_count(d) {
                return Err(Error::DimensionMismatch {
                    expected: grid.face_count(d),
                    found: c.len(),
                });
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteCoefficient("velocity field"));
            }
        }
        Ok(Self { grid, comps })
    }

    /// Sample `f(axis, face_center)` on every face.
    pub fn from_fn<F>(grid: GridSpec, f: F) -> Self
    where
        F: Fn(usize, [f64; 3]) -> f64 + Sync + Send,
    {
        let comps = std::array::from_fn(|d| {
            let mut v = vec![0.0; grid.face_count(d)];
            par::fill_indexed(&mut v, |idx| f(d, grid.face_center(d, grid.face_coords(d, idx))));
            v
        });
        Self { grid, comps }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Flattened view `[u_x | u_y | u_z]`.
    pub fn to_flat(&self) -> Vec<f64> {
        self.comps.concat()
    }

    pub fn from_flat(grid: GridSpec, flat: &[f64]) -> Self {
        let n0 = grid.face_count(0);
        let n1 = grid.face_count(1);
        Self {
            comps: [
                flat[..n0].to_vec(),
                flat[n0..n0 + n1].to_vec(),
                flat[n0 + n1..].to_vec(),
            ],
            grid,
        }
    }

    /// Control-volume weight of a face: one cell volume inside, half on the boundary.
    #[inline]
    pub fn face_weight(grid: &GridSpec, axis: usize, f: [usize; 3]) -> f64 {
        if grid.is_boundary_face(axis, f) {
            0.5 * grid.cell_volume()
        } else {
            grid.cell_volume()
        }
    }

    /// Weighted inner product over all faces.
    pub fn inner(&self, other: &MacField) -> f64 {
        let g = &self.grid;
        (0..3)
            .map(|d| {
                let a = &self.comps[d];
                let b = &other.comps[d];
                par::sum_indexed(a.len(), |i| {
                    MacField::face_weight(g, d, g.face_coords(d, i)) * a[i] * b[i]
                })
            })
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn l2_distance(&self, other: &MacField) -> Result<f64> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch("velocity fields on different grids".into()));
        }
        let mut diff = self.clone();
        for d in 0..3 {
            for (a, b) in diff.comps[d].iter_mut().zip(&other.comps[d]) {
                *a -= b;
            }
        }
        Ok(diff.l2_norm())
    }

    pub fn max_abs(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete divergence at cell centres.
    pub fn divergence(&self) -> ScalarField {
        let g = self.grid;
        let h = g.h();
        let mut out = ScalarField::zeros(g);
        par::fill_indexed(&mut out.values, |idx| {
            let c = g.coords(idx);
            (0..3)
                .map(|d| {
                    let mut up = c;
                    up[d] += 1;
                    (self.comps[d][g.face_index(d, up)] - self.comps[d][g.face_index(d, c)]) / h[d]
                })
                .sum()
        });
        out
    }

    /// Cell-centred average of each component.
    pub fn cell_average(&self) -> [ScalarField; 3] {
        let g = self.grid;
        std::array::from_fn(|d| {
            let mut s = ScalarField::zeros(g);
            par::fill_indexed(&mut s.values, |idx| {
                let c = g.coords(idx);
                let mut up = c;
                up[d] += 1;
                0.5 * (self.comps[d][g.face_index(d, c)] + self.comps[d][g.face_index(d, up)])
            });
            s
        })
    }

    pub fn scaled(&self, s: f64) -> MacField {
        let mut out = self.clone();
        for c in out.comps.iter_mut() {
            c.iter_mut().for_each(|v| *v *= s);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BoxDomain;

    fn grid(n: usize) -> GridSpec {
        GridSpec::uniform(BoxDomain::unit(), n).unwrap()
    }

    #[test]
    fn interpolation_reproduces_linear_fields() {
        let g = grid(8);
        let f = ScalarField::from_fn(g, |x| 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[2]);
        for p in [[0.3, 0.41, 0.77], [0.5, 0.5, 0.5], [0.2, 0.8, 0.1]] {
            let exact = 1.0 + 2.0 * p[0] - p[1] + 0.5 * p[2];
            assert!((f.interpolate(p) - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn divergence_of_linear_velocity() {
        let g = grid(6);
        let u = MacField::from_fn(g, |d, x| match d {
            0 => x[0],
            1 => -2.0 * x[1],
            _ => x[2],
        });
        assert!(u.divergence().max_abs() < 1e-12);
    }

    #[test]
    fn non_finite_values_rejected() {
        let g = grid(4);
        let mut v = vec![0.0; 64];
        v[3] = f64::NAN;
        assert!(ScalarField::from_values(g, v).is_err());
    }

    #[test]
    fn l2_norm_of_constant() {
        let f = ScalarField::constant(grid(5), 2.0);
        assert!((f.l2_norm() - 2.0).abs() < 1e-14);
    }
}
