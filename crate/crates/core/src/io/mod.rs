//! Text serialisation: legacy VTK for fields, CSV for convergence reports and
//! sorted `key=value` manifests. Floats are written with 17 significant
//! digits so that reading a file back reproduces the values exactly.

mod manifest;
mod table;
mod vtk;

pub use manifest::{read_manifest, write_manifest, Manifest};
pub use table::{read_report_csv, row_values, write_report_csv, CSV_HEADER};
pub use vtk::{
    read_vtk, write_cell_vector_vtk, write_mac_component_vtk, write_scalar_vtk, VtkData, VtkLocation,
};

/// Shortest exact text for an `f64`: 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
