use std::fmt::Write as _;
use std::path::Path;

use super::fmt_f64;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, MacField, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VtkLocation {
    Cell,
    Point,
}

/// Contents of a legacy structured-points file with one data array.
#[derive(Debug, Clone, PartialEq)]
pub struct VtkData {
    pub title: String,
    pub dims: [usize; 3],
    pub origin: [f64; 3],
    pub spacing: [f64; 3],
    pub location: VtkLocation,
    pub name: String,
    /// 1 for scalars, 3 for vectors.
    pub components: usize,
    pub values: Vec<f64>,
}

impl VtkData {
    pub fn to_scalar_field(&self, grid: GridSpec) -> Result<ScalarField> {
        if self.components != 1 || self.location != VtkLocation::Cell {
            return Err(Error::Parse("not a cell scalar array".into()));
        }
        ScalarField::from_values(grid, self.values.clone())
    }
}

fn header(out: &mut String, title: &str, dims: [usize; 3], origin: [f64; 3], spacing: [f64; 3]) {
    let _ = writeln!(out, "# vtk DataFile Version 3.0");
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "ASCII");
    let _ = writeln!(out, "DATASET STRUCTURED_POINTS");
    let _ = writeln!(out, "DIMENSIONS {} {} {}", dims[0], dims[1], dims[2]);
    let _ = writeln!(out, "ORIGIN {} {} {}", fmt_f64(origin[0]), fmt_f64(origin[1]), fmt_f64(origin[2]));
    let _ = writeln!(out, "SPACING {} {} {}", fmt_f64(spacing[0]), fmt_f64(spacing[1]), fmt_f64(spacing[2]));
}

fn check_name(name: &str) -> Result<()> {
    if name.is_empty() || name.chars().any(char::is_whitespace) {
        return Err(Error::invalid("name", "VTK array names must be non-empty without spaces"));
    }
    Ok(())
}

/// Cell-centred scalar on the grid's lattice of cell corners.
pub fn write_scalar_vtk(path: &Path, name: &str, field: &ScalarField) -> Result<()> {
    check_name(name)?;
    let g = field.grid();
    let n = g.n();
    let mut out = String::new();
    header(&mut out, name, [n[0] + 1, n[1] + 1, n[2] + 1], g.domain().lo, g.h());
    let _ = writeln!(out, "CELL_DATA {}", g.cell_count());
    let _ = writeln!(out, "SCALARS {name} double 1");
    let _ = writeln!(out, "LOOKUP_TABLE default");
    for v in &field.values {
        out.push_str(&fmt_f64(*v));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// One MAC component as point data on the lattice of its face centres.
pub fn write_mac_component_vtk(path: &Path, name: &str, u: &MacField, axis: usize) -> Result<()> {
    check_name(name)?;
    let g = u.grid();
    let h = g.h();
    let lo = g.domain().lo;
    let origin: [f64; 3] = std::array::from_fn(|d| if d == axis { lo[d] } else { lo[d] + 0.5 * h[d] });
    let dims = g.face_dims(axis);
    let mut out = String::new();
    header(&mut out, name, dims, origin, h);
    let _ = writeln!(out, "POINT_DATA {}", g.face_count(axis));
    let _ = writeln!(out, "SCALARS {name} double 1");
    let _ = writeln!(out, "LOOKUP_TABLE default");
    for v in &u.comps[axis] {
        out.push_str(&fmt_f64(*v));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Cell averages of the face components as a cell vector array.
pub fn write_cell_vector_vtk(path: &Path, name: &str, u: &MacField) -> Result<()> {
    check_name(name)?;
    let g = u.grid();
    let n = g.n();
    let avg = u.cell_average();
    let mut out = String::new();
    header(&mut out, name, [n[0] + 1, n[1] + 1, n[2] + 1], g.domain().lo, g.h());
    let _ = writeln!(out, "CELL_DATA {}", g.cell_count());
    let _ = writeln!(out, "VECTORS {name} double");
    for c in 0..g.cell_count() {
        let _ = writeln!(
            out,
            "{} {} {}",
            fmt_f64(avg[0].values[c]),
            fmt_f64(avg[1].values[c]),
            fmt_f64(avg[2].values[c])
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn parse_triple<T: std::str::FromStr>(line: Option<&str>, key: &str) -> Result<[T; 3]> {
    let line = line.ok_or_else(|| Error::Parse(format!("missing {key} line")))?;
    let mut it = line.split_whitespace();
    if it.next() != Some(key) {
        return Err(Error::Parse(format!("expected {key}, found `{line}`")));
    }
    let vals: Vec<T> = it
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad value `{t}` in {key}"))))
        .collect::<Result<_>>()?;
    vals.try_into().map_err(|_| Error::Parse(format!("{key} needs three values")))
}

/// Reads files produced by the writers in this module.
pub fn read_vtk(path: &Path) -> Result<VtkData> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    if !lines.next().is_some_and(|l| l.starts_with("# vtk DataFile")) {
        return Err(Error::Parse("missing VTK signature".into()));
    }
    let title = lines.next().unwrap_or_default().to_string();
    if lines.next() != Some("ASCII") || lines.next() != Some("DATASET STRUCTURED_POINTS") {
        return Err(Error::Parse("only ASCII STRUCTURED_POINTS is supported".into()));
    }
    let dims: [usize; 3] = parse_triple(lines.next(), "DIMENSIONS")?;
    let origin: [f64; 3] = parse_triple(lines.next(), "ORIGIN")?;
    let spacing: [f64; 3] = parse_triple(lines.next(), "SPACING")?;
    let data = lines.next().ok_or_else(|| Error::Parse("missing data section".into()))?;
    let (kind, count) = data
        .split_once(' ')
        .ok_or_else(|| Error::Parse(format!("bad data line `{data}`")))?;
    let location = match kind {
        "CELL_DATA" => VtkLocation::Cell,
        "POINT_DATA" => VtkLocation::Point,
        _ => return Err(Error::Parse(format!("unknown data section `{kind}`"))),
    };
    let count: usize = count.trim().parse().map_err(|_| Error::Parse("bad data count".into()))?;
    let array = lines.next().ok_or_else(|| Error::Parse("missing array line".into()))?;
    let parts: Vec<&str> = array.split_whitespace().collect();
    let (name, components) = match parts.as_slice() {
        ["SCALARS", name, _, ..] => {
            if lines.next() != Some("LOOKUP_TABLE default") {
                return Err(Error::Parse("expected LOOKUP_TABLE default".into()));
            }
            (name.to_string(), 1)
        }
        ["VECTORS", name, _] => (name.to_string(), 3),
        _ => return Err(Error::Parse(format!("unsupported array line `{array}`"))),
    };
    let values: Vec<f64> = lines
        .flat_map(str::split_whitespace)
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad value `{t}`"))))
        .collect::<Result<_>>()?;
    if values.len() != count * components {
        return Err(Error::Parse(format!(
            "expected {} values, found {}",
            count * components,
            values.len()
        )));
    }
    Ok(VtkData {
        title,
        dims,
        origin,
        spacing,
        location,
        name,
        components,
        values,
    })
}
