//! Sparse operators in CSR form, assembled from deterministic coordinate
//! lists (deduplicated by summation). All operators in this crate are real
//! symmetric; complex state vectors are supported in the apply paths.

use crate::error::{Error, Result};
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct SparseOperator {
    pub dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    pub hermitian: bool,
}

impl SparseOperator {
    /// Build from (row, col, value) triplets; duplicates are summed,
    /// assembly order is canonical (row-major) regardless of input order.
    pub fn from_triplets(dim: usize, mut trip: Vec<(u32, u32, f64)>) -> Self {
        trip.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols: Vec<u32> = Vec::with_capacity(trip.len());
        let mut vals: Vec<f64> = Vec::with_capacity(trip.len());
        let mut i = 0;
        let m = trip.len();
        for r in 0..dim as u32 {
            while i < m && trip[i].0 == r {
                let c = trip[i].1;
                let mut v = 0.0;
                while i < m && trip[i].0 == r && trip[i].1 == c {
                    v += trip[i].2;
                    i += 1;
                }
                if v != 0.0 {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr[r as usize + 1] = cols.len();
        }
        SparseOperator {
            dim,
            row_ptr,
            cols,
            vals,
            hermitian: false,
        }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        for r in 0..self.dim {
            let mut acc = 0.0;
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[i] * x[self.cols[i] as usize];
            }
            y[r] = acc;
        }
    }

    pub fn apply_c(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim);
        for r in 0..self.dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += x[self.cols[i] as usize] * self.vals[i];
            }
            y[r] = acc;
        }
    }

    pub fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.apply(x, &mut y);
        y
    }

    pub fn apply_vec_c(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        self.apply_c(x, &mut y);
        y
    }

    /// max |A - Aᵀ| over assembled entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut defect: f64 = 0.0;
        for r in 0..self.dim {
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[i] as usize;
                let v = self.vals[i];
                let vt = self.get(c, r);
                defect = defect.max((v - vt).abs());
            }
        }
        defect
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        match self.cols[lo..hi].binary_search(&(c as u32)) {
            Ok(i) => self.vals[lo + i],
            Err(_) => 0.0,
        }
    }

    /// Mark hermitian after checking the assembled entries.
    pub fn into_hermitian(mut self) -> Result<Self> {
        let defect = self.hermiticity_defect();
        if defect > 1e-12 {
            return Err(Error::NonHermitian { defect });
        }
        self.hermitian = true;
        Ok(self)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[i] as usize)] = self.vals[i];
            }
        }
        m
    }

    /// Shift the diagonal: A + s·I.
    pub fn shift_diagonal(&self, s: f64) -> SparseOperator {
        let mut trip: Vec<(u32, u32, f64)> = Vec::with_capacity(self.nnz() + self.dim);
        for r in 0..self.dim {
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                trip.push((r as u32, self.cols[i], self.vals[i]));
            }
            trip.push((r as u32, r as u32, s));
        }
        let mut op = SparseOperator::from_triplets(self.dim, trip);
        op.hermitian = self.hermitian;
        op
    }

    /// Debug dump as CSV with columns row,col,re,im.
    pub fn dump_csv(&self, w: &mut impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "row,col,re,im")?;
        for r in 0..self.dim {
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                writeln!(w, "{},{},{:.17e},0e0", r, self.cols[i], self.vals[i])?;
            }
        }
        Ok(())
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1])
                .map(move |i| (r, self.cols[i] as usize, self.vals[i]))
        })
    }
}
