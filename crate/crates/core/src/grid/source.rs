use std::f64::consts::PI;

use super::BoxDomain;

/// Ball outside of which a source is truncated to zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub center: [f64; 3],
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceKind {
    Constant {
        value: f64,
    },
    /// `amplitude * exp(-|x - center|^2 / (2 width^2))`
    Gaussian {
        amplitude: f64,
        center: [f64; 3],
        width: f64,
    },
    /// `amplitude * prod_i sin(pi (x_i - lo_i) / (hi_i - lo_i))`; vanishes on the box boundary.
    ProductSine {
        amplitude: f64,
        lo: [f64; 3],
        hi: [f64; 3],
    },
}

/// Heat source descriptor (fluid source `f` or suspension source `g`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceSpec {
    pub kind: SourceKind,
    pub support: Option<Support>,
}

impl SourceSpec {
    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(value: f64) -> Self {
        Self {
            kind: SourceKind::Constant { value },
            support: None,
        }
    }

    pub fn gaussian(amplitude: f64, center: [f64; 3], width: f64) -> Self {
        Self {
            kind: SourceKind::Gaussian {
                amplitude,
                center,
                width,
            },
            support: None,
        }
    }

    pub fn product_sine(amplitude: f64, bx: &BoxDomain) -> Self {
        Self {
            kind: SourceKind::ProductSine {
                amplitude,
                lo: bx.lo,
                hi: bx.hi,
            },
            support: None,
        }
    }

    pub fn with_support(mut self, center: [f64; 3], radius: f64) -> Self {
        self.support = Some(Support { center, radius });
        self
    }

    pub fn is_zero(&self) -> bool {
        match self.kind {
            SourceKind::Constant { value } => value == 0.0,
            SourceKind::Gaussian { amplitude, .. } | SourceKind::ProductSine { amplitude, .. } => {
                amplitude == 0.0
            }
        }
    }

    /// Lower bound of the source over the box (used for sign checks).
    pub fn is_nonnegative(&self) -> bool {
        match self.kind {
            SourceKind::Constant { value } => value >= 0.0,
            SourceKind::Gaussian { amplitude, .. } | SourceKind::ProductSine { amplitude, .. } => {
                amplitude >= 0.0
            }
        }
    }

    pub fn eval(&self, x: [f64; 3]) -> f64 {
        if let Some(s) = self.support {
            if dist2(x, s.center) > s.radius * s.radius {
                return 0.0;
            }
        }
        match self.kind {
            SourceKind::Constant { value } => value,
            SourceKind::Gaussian {
                amplitude,
                center,
                width,
            } => amplitude * (-dist2(x, center) / (2.0 * width * width)).exp(),
            SourceKind::ProductSine { amplitude, lo, hi } => {
                amplitude
                    * (0..3)
                        .map(|i| (PI * (x[i] - lo[i]) / (hi[i] - lo[i])).sin())
                        .product::<f64>()
            }
        }
    }
}

pub fn eval_source(s: &SourceSpec, x: [f64; 3]) -> f64 {
    s.eval(x)
}

#[inline]
pub(crate) fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    (0..3).map(|i| (a[i] - b[i]) * (a[i] - b[i])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_source() {
        assert_eq!(SourceSpec::constant(1.0).eval([0.3, 0.1, 0.9]), 1.0);
    }

    #[test]
    fn gaussian_peak_value() {
        let c = [0.4, 0.5, 0.6];
        assert_eq!(SourceSpec::gaussian(1.0, c, 0.1).eval(c), 1.0);
    }

    #[test]
    fn product_sine_center_value() {
        let s = SourceSpec::product_sine(1.0, &BoxDomain::unit());
        assert!((s.eval([0.5; 3]) - 1.0).abs() < 1e-15);
        assert!(s.eval([0.0, 0.5, 0.5]).abs() < 1e-15);
    }

    #[test]
    fn truncated_support() {
        let s = SourceSpec::constant(2.0).with_support([0.5; 3], 0.1);
        assert_eq!(s.eval([0.5; 3]), 2.0);
        assert_eq!(s.eval([0.5, 0.5, 0.65]), 0.0);
    }
}
