//! Minimal complex CSR matrix used by the operator and superoperator builders.
//!
//! The hot path of the whole crate is `matvec` inside the Krylov iterations;
//! everything else (kron, add, matmul) runs once at assembly time.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Entries below this magnitude are dropped at assembly time. Tight enough
/// not to touch physical couplings, loose enough to suppress roundoff fill.
pub const DROP_TOL: f64 = 1e-14;

/// Compressed sparse row matrix over `Complex64`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsMat {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<Complex64>,
}

impl CsMat {
    /// Builds a CSR matrix from (row, col, value) triplets, summing duplicates
    /// and dropping entries below `drop_tol`.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, Complex64)>,
        drop_tol: f64,
    ) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut data: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut rows: Vec<usize> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if let (Some(&lr), Some(&lc), Some(lv)) = (rows.last(), indices.last(), data.last_mut())
            {
                if lr == r && lc == c {
                    *lv += v;
                    continue;
                }
            }
            rows.push(r);
            indices.push(c);
            data.push(v);
        }
        // Drop small entries after duplicate accumulation.
        let mut keep_indices = Vec::with_capacity(indices.len());
        let mut keep_data = Vec::with_capacity(data.len());
        for ((r, c), v) in rows.into_iter().zip(indices).zip(data) {
            if v.norm() > drop_tol {
                indptr[r + 1] += 1;
                keep_indices.push(c);
                keep_data.push(v);
            }
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        CsMat {
            nrows,
            ncols,
            indptr,
            indices: keep_indices,
            data: keep_data,
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsMat {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        CsMat {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: vec![Complex64::new(1.0, 0.0); n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[Complex64]) {
        let (lo, hi) = (self.indptr[r], self.indptr[r + 1]);
        (&self.indices[lo..hi], &self.data[lo..hi])
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// Iterates over all stored entries as (row, col, value).
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals).map(move |(&c, &v)| (r, c, v))
        })
    }

    /// y = A x. Panics on shape mismatch (internal use only).
    pub fn matvec_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            let mut acc = Complex64::new(0.0, 0.0);
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            y[r] = acc;
        }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn scale(&self, s: Complex64) -> CsMat {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= s;
        }
        out
    }

    pub fn transpose(&self) -> CsMat {
        self.transpose_impl(false)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CsMat {
        self.transpose_impl(true)
    }

    fn transpose_impl(&self, conj: bool) -> CsMat {
        let mut triplets = Vec::with_capacity(self.nnz());
        for (r, c, v) in self.iter() {
            triplets.push((c, r, if conj { v.conj() } else { v }));
        }
        CsMat::from_triplets(self.ncols, self.nrows, triplets, 0.0)
    }

    pub fn add(&self, other: &CsMat) -> Result<CsMat> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::DimensionMismatch {
                left: self.nrows,
                right: other.nrows,
            });
        }
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        triplets.extend(self.iter());
        triplets.extend(other.iter());
        Ok(CsMat::from_triplets(self.nrows, self.ncols, triplets, DROP_TOL))
    }

    /// C = A B via row-wise sparse accumulation.
    pub fn matmul(&self, other: &CsMat) -> Result<CsMat> {
        if self.ncols != other.nrows {
            return Err(Error::DimensionMismatch {
                left: self.ncols,
                right: other.nrows,
            });
        }
        let mut triplets = Vec::new();
        let mut acc: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); other.ncols];
        let mut touched: Vec<usize> = Vec::new();
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&k, &v) in cols.iter().zip(vals) {
                let (bcols, bvals) = other.row(k);
                for (&c, &bv) in bcols.iter().zip(bvals) {
                    if acc[c] == Complex64::new(0.0, 0.0) {
                        touched.push(c);
                    }
                    acc[c] += v * bv;
                }
            }
            for &c in &touched {
                triplets.push((r, c, acc[c]));
                acc[c] = Complex64::new(0.0, 0.0);
            }
            touched.clear();
        }
        Ok(CsMat::from_triplets(self.nrows, other.ncols, triplets, DROP_TOL))
    }

    /// Kronecker product A (x) B.
    pub fn kron(&self, other: &CsMat) -> CsMat {
        let mut triplets = Vec::with_capacity(self.nnz() * other.nnz());
        for (ra, ca, va) in self.iter() {
            for (rb, cb, vb) in other.iter() {
                triplets.push((ra * other.nrows + rb, ca * other.ncols + cb, va * vb));
            }
        }
        CsMat::from_triplets(
            self.nrows * other.nrows,
            self.ncols * other.ncols,
            triplets,
            0.0,
        )
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.nrows.min(self.ncols))
            .map(|i| self.get(i, i))
            .sum()
    }

    /// max_{ij} |A_ij - conj(A_ji)|.
    pub fn hermiticity_deviation(&self) -> f64 {
        let adj = self.adjoint();
        let mut dev = 0.0f64;
        // Both matrices are CSR with sorted columns; walk rows in lockstep.
        for r in 0..self.nrows {
            let (ca, va) = self.row(r);
            let (cb, vb) = adj.row(r);
            let (mut i, mut j) = (0, 0);
            while i < ca.len() || j < cb.len() {
                match (ca.get(i), cb.get(j)) {
                    (Some(&a), Some(&b)) if a == b => {
                        dev = dev.max((va[i] - vb[j]).norm());
                        i += 1;
                        j += 1;
                    }
                    (Some(&a), Some(&b)) if a < b => {
                        dev = dev.max(va[i].norm());
                        i += 1;
                    }
                    (Some(_), Some(_)) => {
                        dev = dev.max(vb[j].norm());
                        j += 1;
                    }
                    (Some(_), None) => {
                        dev = dev.max(va[i].norm());
                        i += 1;
                    }
                    (None, Some(_)) => {
                        dev = dev.max(vb[j].norm());
                        j += 1;
                    }
                    (None, None) => unreachable!(),
                }
            }
        }
        dev
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        let mut out = Array2::zeros((self.nrows, self.ncols));
        for (r, c, v) in self.iter() {
            out[(r, c)] = v;
        }
        out
    }

    pub fn from_dense(a: &Array2<Complex64>, drop_tol: f64) -> CsMat {
        let mut triplets = Vec::new();
        for ((r, c), &v) in a.indexed_iter() {
            if v.norm() > drop_tol {
                triplets.push((r, c, v));
            }
        }
        CsMat::from_triplets(a.nrows(), a.ncols(), triplets, 0.0)
    }
}
