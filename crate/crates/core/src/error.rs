use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("sphere radius {r_eps:.3e} is below two grid spacings ({h_max:.3e}); use n >= {min_n}")]
    UnresolvedSphere { r_eps: f64, h_max: f64, min_n: usize },

    #[error("no period cell fits inside the box")]
    EmptyDomain,

    #[error("solver did not converge in {iterations} iterations (residual {residual:.3e})")]
    MaxIterExceeded { iterations: usize, residual: f64 },

    #[error("conjugate gradient breakdown: non-positive curvature {curvature:.3e} at iteration {iteration}")]
    IndefiniteBreakdown { iteration: usize, curvature: f64 },

    #[error("BiCGStab stagnated at iteration {iteration} (residual {residual:.3e})")]
    Stagnation { iteration: usize, residual: f64 },

    #[error("non-finite coefficient in {0}")]
    NonFiniteCoefficient(&'static str),

    #[error("Picard iteration diverged after {iterations} outer iterations (residual {residual:.3e})")]
    PicardDiverged { iterations: usize, residual: f64 },

    #[error("gamma must be positive to recover the suspension temperature")]
    ZeroGamma,

    #[error("argument outside the admissible domain: {0}")]
    DomainError(String),

    #[error("sphere of radius {radius} around {center:?} leaves the box")]
    SphereOutOfDomain { center: [f64; 3], radius: f64 },

    #[error("field has zero discrete gradient; ratios are undefined")]
    ZeroGradient,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
