//! Compressed sparse row matrices over real coefficients, applied to complex
//! vectors, plus the exact matrix-exponential action used for ansatz gates.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Real CSR matrix. Row entries are stored with ascending column index and
/// duplicate coordinates merged.
#[derive(Debug, Clone)]
pub struct SparseOp {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

impl SparseOp {
    /// Build from (row, col, value) triplets; duplicates are summed and exact
    /// zeros dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(u32, u32, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(u32, u32)> = None;
        for &(r, c, v) in &triplets {
            debug_assert!((r as usize) < nrows && (c as usize) < ncols);
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r as usize + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        // drop exact zeros produced by cancellation
        let mut op = SparseOp {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        };
        op.prune_zeros();
        op
    }

    fn prune_zeros(&mut self) {
        if self.values.iter().all(|&v| v != 0.0) {
            return;
        }
        let mut new_ptr = vec![0usize; self.nrows + 1];
        let mut new_col = Vec::with_capacity(self.col_idx.len());
        let mut new_val = Vec::with_capacity(self.values.len());
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.values[k] != 0.0 {
                    new_col.push(self.col_idx[k]);
                    new_val.push(self.values[k]);
                }
            }
            new_ptr[r + 1] = new_col.len();
        }
        self.row_ptr = new_ptr;
        self.col_idx = new_col;
        self.values = new_val;
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `out = A x` (overwrites `out`).
    pub fn apply_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(out.len(), self.nrows);
        for (r, slot) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k] as usize];
            }
            *slot = acc;
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.nrows];
        self.apply_into(x, &mut out);
        out
    }

    /// `out = A x` for a real vector.
    pub fn apply_real(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.ncols);
        let mut out = vec![0.0f64; self.nrows];
        for (r, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k] as usize];
            }
            *slot = acc;
        }
        out
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.col_idx[k] as usize)] += self.values[k];
            }
        }
        m
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let n = self.nrows.min(self.ncols);
        let mut d = vec![0.0; n];
        for (r, slot) in d.iter_mut().enumerate() {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.col_idx[k] as usize == r {
                    *slot += self.values[k];
                }
            }
        }
        d
    }

    /// Maximum absolute row sum (induced infinity norm).
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|r| {
                self.values[self.row_ptr[r]..self.row_ptr[r + 1]]
                    .iter()
                    .map(|v| v.abs())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Maximum absolute column sum (induced 1-norm).
    pub fn norm_one(&self) -> f64 {
        let mut col_sums = vec![0.0f64; self.ncols];
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                col_sums[self.col_idx[k] as usize] += self.values[k].abs();
            }
        }
        col_sums.into_iter().fold(0.0, f64::max)
    }

    /// Upper bound on the spectral norm: `sqrt(||A||_1 ||A||_inf)`.
    pub fn norm_bound(&self) -> f64 {
        (self.norm_one() * self.norm_inf()).sqrt()
    }

    /// Gershgorin disc bound `(lo, hi)` enclosing all eigenvalues of a square
    /// matrix: per row, center at the diagonal entry with the off-diagonal
    /// absolute sum as radius.
    pub fn gershgorin_interval(&self) -> (f64, f64) {
        debug_assert_eq!(self.nrows, self.ncols);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in 0..self.nrows {
            let mut diag = 0.0;
            let mut radius = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.col_idx[k] as usize == r {
                    diag += self.values[k];
                } else {
                    radius += self.values[k].abs();
                }
            }
            lo = lo.min(diag - radius);
            hi = hi.max(diag + radius);
        }
        if self.nrows == 0 {
            (0.0, 0.0)
        } else {
            (lo, hi)
        }
    }

    /// Scale every stored value in place.
    pub fn scale(&mut self, s: f64) {
        for v in &mut self.values {
            *v *= s;
        }
    }

    /// Sum of sparse operators on identical shapes.
    pub fn add(&self, other: &SparseOp) -> SparseOp {
        assert_eq!(self.nrows, other.nrows);
        assert_eq!(self.ncols, other.ncols);
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for op in [self, other] {
            for r in 0..op.nrows {
                for k in op.row_ptr[r]..op.row_ptr[r + 1] {
                    triplets.push((r as u32, op.col_idx[k], op.values[k]));
                }
            }
        }
        SparseOp::from_triplets(self.nrows, self.ncols, triplets)
    }

    /// In-place `x <- exp(t A) x` via scaling-and-squaring with a truncated
    /// Taylor series. Exact to machine precision for the operator norms used
    /// here; terms stop once `||term|| <= 1e-16 ||x||`.
    pub fn expm_apply(&self, t: f64, x: &mut [Complex64]) {
        debug_assert_eq!(self.nrows, self.ncols);
        debug_assert_eq!(x.len(), self.ncols);
        if t == 0.0 || self.nnz() == 0 {
            return;
        }
        let bound = self.norm_bound() * t.abs();
        // halve until the scaled norm is comfortably inside the Taylor radius
        let squarings = if bound > 1.0 {
            (bound.log2().ceil() as u32).min(40)
        } else {
            0
        };
        let dt = t / f64::powi(2.0, squarings as i32);
        let x_norm = |v: &[Complex64]| v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let mut term = vec![Complex64::new(0.0, 0.0); x.len()];
        let mut next = vec![Complex64::new(0.0, 0.0); x.len()];
        for _ in 0..(1u64 << squarings) {
            let base_norm = x_norm(x);
            if base_norm == 0.0 {
                return;
            }
            term.copy_from_slice(x);
            let mut k = 1u64;
            loop {
                self.apply_into(&term, &mut next);
                let s = dt / k as f64;
                for (t_i, n_i) in term.iter_mut().zip(&next) {
                    *t_i = s * n_i;
                }
                for (x_i, t_i) in x.iter_mut().zip(&term) {
                    *x_i += t_i;
                }
                if x_norm(&term) <= 1e-16 * base_norm {
                    break;
                }
                k += 1;
                assert!(k < 200, "matrix exponential series failed to converge");
            }
        }
    }
}
