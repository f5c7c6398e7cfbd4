use crate::error::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

const ASSEMBLY_CHUNK: usize = 8192;

impl CsrMatrix {
    /// Build from raw arrays, checking the structural invariants.
    pub fn from_raw(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        cols: Vec<u32>,
        vals: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != nrows + 1 || row_ptr[0] != 0 || *row_ptr.last().unwrap() != cols.len() {
            return Err(Error::invalid("csr", "row offsets inconsistent with entries"));
        }
        if cols.len() != vals.len() {
            return Err(Error::invalid("csr", "column and value arrays differ in length"));
        }
        for r in 0..nrows {
            if row_ptr[r + 1] < row_ptr[r] {
                return Err(Error::invalid("csr", "row offsets decrease"));
            }
            let row = &cols[row_ptr[r]..row_ptr[r + 1]];
            for w in row.windows(2) {
                if w[1] <= w[0] {
                    return Err(Error::invalid("csr", format!("row {r} has unsorted or duplicate columns")));
                }
            }
            if row.iter().any(|&c| c as usize >= ncols) {
                return Err(Error::invalid("csr", format!("row {r} has a column out of range")));
            }
        }
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteCoefficient("matrix entries"));
        }
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            cols,
            vals,
        })
    }

    /// Assemble row by row: `row_fn(r, entries)` pushes `(col, value)` pairs
    /// for row `r`. Duplicates are summed; columns are sorted.
    pub fn from_row_fn<F>(nrows: usize, ncols: usize, row_fn: F) -> Result<Self>
    where
        F: Fn(usize, &mut Vec<(usize, f64)>) + Sync + Send,
    {
        let assemble_chunk = |c: usize| {
            let lo = c * ASSEMBLY_CHUNK;
            let hi = (lo + ASSEMBLY_CHUNK).min(nrows);
            let mut lens = Vec::with_capacity(hi - lo);
            let mut cols = Vec::new();
            let mut vals = Vec::new();
            let mut buf = Vec::with_capacity(16);
            for r in lo..hi {
                buf.clear();
                row_fn(r, &mut buf);
                buf.sort_by_key(|e| e.0);
                let start = cols.len();
                for &(c, v) in buf.iter() {
                    if cols.len() > start && *cols.last().unwrap() == c as u32 {
                        *vals.last_mut().unwrap() += v;
                    } else {
                        cols.push(c as u32);
                        vals.push(v);
                    }
                }
                lens.push(cols.len() - start);
            }
            (lens, cols, vals)
        };
        let chunks = nrows.div_ceil(ASSEMBLY_CHUNK);
        #[cfg(feature = "parallel")]
        let parts: Vec<_> = {
            use rayon::prelude::*;
            (0..chunks).into_par_iter().map(assemble_chunk).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let parts: Vec<_> = (0..chunks).map(assemble_chunk).collect();

        let nnz: usize = parts.iter().map(|p| p.1.len()).sum();
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for (lens, c, v) in parts {
            for l in lens {
                row_ptr.push(row_ptr.last().unwrap() + l);
            }
            cols.extend(c);
            vals.extend(v);
        }
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteCoefficient("assembled matrix"));
        }
        if cols.iter().any(|&c| c as usize >= ncols) {
            return Err(Error::invalid("csr", "column index out of range"));
        }
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            cols,
            vals,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            cols: (0..n as u32).collect(),
            vals: vec![1.0; n],
        }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let ncols = rows.first().map_or(0, |r| r.len());
        Self::from_row_fn(rows.len(), ncols, |r, e| {
            for (c, &v) in rows[r].iter().enumerate() {
                if v != 0.0 {
                    e.push((c, v));
                }
            }
        })
        .expect("dense input is finite")
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .zip(&self.vals[span])
            .map(|(&c, &v)| (c as usize, v))
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|e| e.0 == c).map_or(0.0, |e| e.1)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|r| self.get(r, r)).collect()
    }

    #[inline]
    fn row_dot(&self, r: usize, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for k in self.row_ptr[r]..self.row_ptr[r + 1] {
            acc += self.vals[k] * x[self.cols[k] as usize];
        }
        acc
    }

    /// `y = A x`, parallel over rows when the `parallel` feature is enabled.
    pub fn spmv(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            y.par_chunks_mut(ASSEMBLY_CHUNK)
                .enumerate()
                .for_each(|(c, ys)| {
                    let base = c * ASSEMBLY_CHUNK;
                    for (o, yi) in ys.iter_mut().enumerate() {
                        *yi = self.row_dot(base + o, x);
                    }
                });
        }
        #[cfg(not(feature = "parallel"))]
        self.spmv_seq(x, y);
    }

    /// `y = A x`, returning `x · y` from the same pass.
    pub fn spmv_dot(&self, x: &[f64], y: &mut [f64]) -> f64 {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        let [d] = crate::par::chunked_mut([y], |off, [ys]| {
            let mut acc = 0.0;
            for (o, yi) in ys.iter_mut().enumerate() {
                *yi = self.row_dot(off + o, x);
                acc += x[off + o] * *yi;
            }
            [acc]
        });
        d
    }

    /// Sequential `y = A x`; always available for comparison.
    pub fn spmv_seq(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for (r, yi) in y.iter_mut().enumerate() {
            *yi = self.row_dot(r, x);
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.spmv(x, &mut y);
        y
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.cols {
            counts[c as usize + 1] += 1;
        }
        for i in 0..self.ncols {
            counts[i + 1] += counts[i];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut cols = vec![0u32; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                let slot = next[c];
                cols[slot] = r as u32;
                vals[slot] = v;
                next[c] += 1;
            }
        }
        CsrMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr,
            cols,
            vals,
        }
    }

    /// Largest absolute asymmetry `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let t = self.transpose();
        let mut worst: f64 = 0.0;
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                worst = worst.max((v - t.get(r, c)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (r, row) in d.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] = v;
            }
        }
        d
    }
}
