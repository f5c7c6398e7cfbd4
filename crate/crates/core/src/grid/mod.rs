//! Uniform 3D grids over axis-aligned boxes, the perforated geometry and the
//! field containers living on them.

mod domain;
mod field;
mod source;

pub use domain::{build_perforated_domain, phase_volume, PerforatedDomain, Phase, RRule};
pub use field::{MacField, ScalarField};
pub use source::{eval_source, SourceKind, SourceSpec, Support};

use crate::error::{Error, Result};

/// Open axis-aligned box `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxDomain {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl BoxDomain {
    pub fn new(lo: [f64; 3], hi: [f64; 3]) -> Result<Self> {
        for i in 0..3 {
            if !(lo[i].is_finite() && hi[i].is_finite()) {
                return Err(Error::invalid("box", "non-finite bounds"));
            }
            if hi[i] <= lo[i] {
                return Err(Error::invalid(
                    "box",
                    format!("hi[{i}] = {} must exceed lo[{i}] = {}", hi[i], lo[i]),
                ));
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn unit() -> Self {
        Self {
            lo: [0.0; 3],
            hi: [1.0; 3],
        }
    }

    /// Cube `[-half, half]^3`.
    pub fn centered_cube(half: f64) -> Result<Self> {
        Self::new([-half; 3], [half; 3])
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn volume(&self) -> f64 {
        (0..3).map(|i| self.extent(i)).product()
    }

    pub fn surface_area(&self) -> f64 {
        let e = [self.extent(0), self.extent(1), self.extent(2)];
        2.0 * (e[0] * e[1] + e[1] * e[2] + e[0] * e[2])
    }

    pub fn center(&self) -> [f64; 3] {
        std::array::from_fn(|i| 0.5 * (self.lo[i] + self.hi[i]))
    }

    /// Membership in the closed box, with a small relative slack.
    pub fn contains_closed(&self, x: [f64; 3]) -> bool {
        (0..3).all(|i| {
            let tol = 1e-12 * self.extent(i);
            x[i] >= self.lo[i] - tol && x[i] <= self.hi[i] + tol
        })
    }
}

/// Uniform cell-centred grid with `n[i]` cells along axis `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    bx: BoxDomain,
    n: [usize; 3],
    h: [f64; 3],
}

pub const MIN_CELLS_PER_AXIS: usize = 4;

impl GridSpec {
    pub fn new(bx: BoxDomain, n: [usize; 3]) -> Result<Self> {
        if let Some(bad) = n.iter().find(|&&v| v < MIN_CELLS_PER_AXIS) {
            return Err(Error::invalid(
                "grid.n",
                format!("{bad} cells per axis, need at least {MIN_CELLS_PER_AXIS}"),
            ));
        }
        let h = std::array::from_fn(|i| bx.extent(i) / n[i] as f64);
        Ok(Self { bx, n, h })
    }

    pub fn uniform(bx: BoxDomain, n: usize) -> Result<Self> {
        Self::new(bx, [n; 3])
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.bx
    }

    pub fn n(&self) -> [usize; 3] {
        self.n
    }

    pub fn h(&self) -> [f64; 3] {
        self.h
    }

    pub fn max_h(&self) -> f64 {
        self.h.iter().cloned().fold(0.0, f64::max)
    }

    pub fn cell_count(&self) -> usize {
        self.n.iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.iter().product()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n[0] * (j + self.n[1] * k)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.n[0];
        let r = idx / self.n[0];
        [i, r % self.n[1], r / self.n[1]]
    }

    #[inline]
    pub fn cell_center(&self, c: [usize; 3]) -> [f64; 3] {
        std::array::from_fn(|d| self.bx.lo[d] + (c[d] as f64 + 0.5) * self.h[d])
    }

    /// Shape of the face array normal to `axis` (one extra layer along it).
    #[inline]
    pub fn face_dims(&self, axis: usize) -> [usize; 3] {
        let mut d = self.n;
        d[axis] += 1;
        d
    }

    pub fn face_count(&self, axis: usize) -> usize {
        self.face_dims(axis).iter().product()
    }

    #[inline]
    pub fn face_index(&self, axis: usize, f: [usize; 3]) -> usize {
        let d = self.face_dims(axis);
        f[0] + d[0] * (f[1] + d[1] * f[2])
    }

    #[inline]
    pub fn face_coords(&self, axis: usize, idx: usize) -> [usize; 3] {
        let d = self.face_dims(axis);
        let i = idx % d[0];
        let r = idx / d[0];
        [i, r % d[1], r / d[1]]
    }

    #[inline]
    pub fn face_center(&self, axis: usize, f: [usize; 3]) -> [f64; 3] {
        std::array::from_fn(|d| {
            let off = if d == axis { 0.0 } else { 0.5 };
            self.bx.lo[d] + (f[d] as f64 + off) * self.h[d]
        })
    }

    /// True when the face lies on the box boundary.
    #[inline]
    pub fn is_boundary_face(&self, axis: usize, f: [usize; 3]) -> bool {
        f[axis] == 0 || f[axis] == self.n[axis]
    }

    /// Cells on either side of a face; `None` outside the box.
    #[inline]
    pub fn face_cells(&self, axis: usize, f: [usize; 3]) -> (Option<usize>, Option<usize>) {
        let lo = if f[axis] > 0 {
            let mut c = f;
            c[axis] -= 1;
            Some(self.index(c[0], c[1], c[2]))
        } else {
            None
        };
        let hi = if f[axis] < self.n[axis] {
            Some(self.index(f[0], f[1], f[2]))
        } else {
            None
        };
        (lo, hi)
    }

    /// Range of cell indices along `axis` whose centres fall in `[a, b)`.
    pub fn cell_range(&self, axis: usize, a: f64, b: f64) -> std::ops::Range<usize> {
        let lo = self.bx.lo[axis];
        let h = self.h[axis];
        let first = ((a - lo) / h - 0.5).ceil().max(0.0) as usize;
        let last = (((b - lo) / h - 0.5).ceil().max(0.0) as usize).min(self.n[axis]);
        first.min(last)..last
    }

    pub fn same_as(&self, other: &GridSpec) -> bool {
        self.n == other.n && self.bx == other.bx
    }
}
