//! Micro- and macro-scale solvers for a Stokes–Boussinesq fluid carrying a
//! periodic cloud of small, highly conductive, radiant spheres.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`]: boxes, uniform grids, perforated geometry, fields and sources.
//! * [`linalg`]: CSR storage, Krylov solvers and the Uzawa saddle-point solver.
//! * [`stokes`] / [`thermal`]: MAC and cell-centred discretisations shared by
//!   both scales.
//! * [`micro`]: the ε-scale coupled problem on the perforated box.
//! * [`homogenized`]: the Brinkman-Boussinesq two-temperature limit.
//! * [`analysis`]: correctors, suspension measures, sphere averages,
//!   inequality ratios, the cell drag problem and micro/macro error metrics.
//! * [`io`]: VTK, CSV and manifest serialisation.
//!
//! Data-parallel kernels run on rayon when the `parallel` feature is enabled
//! (the default) and fall back to plain loops otherwise.

pub mod analysis;
pub mod error;
pub mod grid;
pub mod homogenized;
pub mod io;
pub mod linalg;
pub mod micro;
pub mod par;
mod picard;
pub mod stokes;
pub mod thermal;

pub use error::{Error, Result};
