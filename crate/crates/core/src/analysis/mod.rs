//! Correctors, suspension measures, sphere averages, inequality ratios, the
//! cell drag problem and micro/macro comparison metrics.

pub mod audit;
mod corrector;
mod drag;
mod measure;
mod ratios;
mod report;
mod sphere;

pub use audit::{run_audit, AuditConfig, PropertyOutcome};
pub use corrector::{
    annulus_capacity, build_w_eps_field, corrector_energy, corrector_profile, radial_energy, PiecewiseLinearProfile,
};
pub use drag::{cell_stokes_drag, cell_stokes_drag_along, CellDrag};
pub use measure::{analytic_mass, ball_mean_defect, mass_deficit, measure_integral, MeasureMode, MeasureWeights};
pub use ratios::{cell_gradient_sq, inequality_ratios, inequality_ratios_with, InequalityRatios};
pub use report::{measure_gap, micro_macro_errors, ConvergenceReport, ConvergenceRow, TestFunction};
pub use sphere::{build_tilde_fields, gauss_legendre, sphere_averages, sphere_surface_average, MIN_QUAD_ORDER};
