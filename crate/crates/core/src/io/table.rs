use std::path::Path;

use super::fmt_f64;
use crate::analysis::{ConvergenceReport, ConvergenceRow};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 14] = [
    "eps",
    "r_eps",
    "n",
    "err_theta_L2",
    "err_u_L2",
    "gap_phi1",
    "gap_phi2",
    "gap_phi3",
    "ratio17",
    "ratio18",
    "ratio19",
    "ratio_p24",
    "picard_iters",
    "seconds",
];

/// Columns of one report row in header order. Missing gaps read as NaN.
pub fn row_values(row: &ConvergenceRow) -> [f64; 14] {
    let gap = |i: usize| row.gaps.get(i).copied().unwrap_or(f64::NAN);
    [
        row.eps,
        row.r_eps,
        row.n as f64,
        row.err_theta_l2,
        row.err_u_l2,
        gap(0),
        gap(1),
        gap(2),
        row.ratios.outer_average,
        row.ratios.ball_average,
        row.ratios.average_gap,
        row.ratios.measure_norm,
        row.picard_iters as f64,
        row.seconds,
    ]
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

pub fn write_report_csv(path: &Path, report: &ConvergenceReport) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_path(path).map_err(csv_err)?;
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for row in &report.rows {
        let cells: Vec<String> = row_values(row)
            .iter()
            .enumerate()
            .map(|(i, v)| match CSV_HEADER[i] {
                "n" | "picard_iters" => format!("{}", *v as u64),
                _ => fmt_f64(*v),
            })
            .collect();
        w.write_record(&cells).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a report written by [`write_report_csv`]; the header must match.
pub fn read_report_csv(path: &Path) -> Result<Vec<[f64; 14]>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::Parse(format!("unexpected CSV header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != CSV_HEADER.len() {
            return Err(Error::Parse(format!("row has {} columns, expected {}", rec.len(), CSV_HEADER.len())));
        }
        let mut vals = [0.0; 14];
        for (i, cell) in rec.iter().enumerate() {
            vals[i] = cell
                .parse()
                .map_err(|_| Error::Parse(format!("bad number `{cell}` in column {}", CSV_HEADER[i])))?;
        }
        rows.push(vals);
    }
    Ok(rows)
}
