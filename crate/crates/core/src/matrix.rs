//! Dense square matrices with just enough linear algebra for desk-scale
//! operator work: products, LU solves with partial pivoting, and a 2-norm
//! estimate. Row-major storage.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::rng::XorShift;

/// Relative pivot threshold below which a factorization is declared
/// singular. This is the operational test for "the shift lies outside the
/// resolvent set".
pub const PIVOT_RTOL: f64 = 1e-13;

/// A square row-major matrix of f64.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Matrix { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    /// Builds from row-major data; the length must be a perfect square times
    /// the dimension.
    pub fn from_rows(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimMismatch { expected: dim * dim, got: data.len() });
        }
        if let Some(i) = math::all_finite(&data) {
            return Err(Error::NonFinite { context: "matrix entry", index: i });
        }
        Ok(Matrix { dim, data })
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        let mut m = Matrix::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m.data[i * entries.len() + i] = e;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// self + c * other, in place.
    pub fn axpy(&mut self, c: f64, other: &Matrix) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += c * b;
        }
    }

    pub fn scale(&mut self, c: f64) {
        for a in self.data.iter_mut() {
            *a *= c;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim);
        let mut y = vec![0.0; self.dim];
        for (i, yi) in y.iter_mut().enumerate() {
            let row = self.row(i);
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x.iter()) {
                acc += a * b;
            }
            *yi = acc;
        }
        y
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!(self.dim, other.dim);
        let d = self.dim;
        let mut out = Matrix::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let out_row = &mut out.data[i * d..(i + 1) * d];
                for (o, b) in out_row.iter_mut().zip(orow.iter()) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let d = self.dim;
        let mut out = Matrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        math::sqrt(self.data.iter().map(|x| x * x).sum())
    }

    /// Max absolute row sum (the induced infinity norm).
    pub fn inf_norm(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        math::all_finite(&self.data).is_none()
    }

    /// Spectral norm estimate by power iteration on AᵀA.
    ///
    /// Deterministic start vector; converges to the dominant singular value
    /// with relative accuracy set by `tol` (or the iteration cap on
    /// clustered spectra, where the estimate errs low by at most the
    /// residual of the iteration).
    pub fn two_norm_estimate(&self, max_iter: usize, tol: f64) -> f64 {
        if self.dim == 0 {
            return 0.0;
        }
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let at = self.transpose();
        let mut rng = XorShift::new(0x00c0_ffee);
        let mut v: Vec<f64> = (0..self.dim).map(|_| 1.0 + 0.01 * rng.next_f64()).collect();
        normalize(&mut v);
        let mut sigma2 = 0.0;
        for _ in 0..max_iter {
            let mut w = at.matvec(&self.matvec(&v));
            let lambda: f64 = w.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            normalize(&mut w);
            v = w;
            if lambda > 0.0 && (lambda - sigma2).abs() <= tol * lambda {
                sigma2 = lambda;
                break;
            }
            sigma2 = lambda;
        }
        math::sqrt(sigma2.max(0.0))
    }

    /// LU factorization with partial pivoting. Pivots smaller than
    /// `PIVOT_RTOL` times the matrix scale trip a resolvent-set error, with
    /// `shift_hint` reported as the offending shift.
    pub fn lu(&self, shift_hint: f64) -> Result<LuFactor> {
        let d = self.dim;
        let mut lu = self.data.clone();
        let mut perm: Vec<usize> = (0..d).collect();
        let scale = self.inf_norm().max(f64::MIN_POSITIVE);
        for col in 0..d {
            // pivot search
            let mut best = col;
            let mut best_val = lu[perm[col] * d + col].abs();
            for r in col + 1..d {
                let v = lu[perm[r] * d + col].abs();
                if v > best_val {
                    best = r;
                    best_val = v;
                }
            }
            if best_val < PIVOT_RTOL * scale {
                return Err(Error::ResolventSet { shift: shift_hint });
            }
            perm.swap(col, best);
            let prow = perm[col];
            let pivot = lu[prow * d + col];
            for r in col + 1..d {
                let row = perm[r];
                let factor = lu[row * d + col] / pivot;
                lu[row * d + col] = factor;
                for c in col + 1..d {
                    lu[row * d + c] -= factor * lu[prow * d + c];
                }
            }
        }
        Ok(LuFactor { dim: d, lu, perm })
    }
}

fn normalize(v: &mut [f64]) {
    let n = math::sqrt(v.iter().map(|x| x * x).sum());
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}

/// An LU factorization with its permutation, reusable across right-hand
/// sides.
#[derive(Clone, Debug)]
pub struct LuFactor {
    dim: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl LuFactor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        debug_assert_eq!(rhs.len(), self.dim);
        let d = self.dim;
        let mut y = vec![0.0; d];
        for i in 0..d {
            let row = self.perm[i];
            let mut acc = rhs[row];
            for j in 0..i {
                acc -= self.lu[row * d + j] * y[j];
            }
            y[i] = acc;
        }
        for i in (0..d).rev() {
            let row = self.perm[i];
            let mut acc = y[i];
            for j in i + 1..d {
                acc -= self.lu[row * d + j] * y[j];
            }
            y[i] = acc / self.lu[row * d + i];
        }
        y
    }

    /// Solves against every column of `rhs`, returning the matrix of
    /// solutions.
    pub fn solve_matrix(&self, rhs: &Matrix) -> Matrix {
        let d = self.dim;
        let mut out = Matrix::zeros(d);
        let mut col = vec![0.0; d];
        for j in 0..d {
            for i in 0..d {
                col[i] = rhs.get(i, j);
            }
            let x = self.solve(&col);
            for i in 0..d {
                out.set(i, j, x[i]);
            }
        }
        out
    }

    /// The inverse, materialized column by column.
    pub fn inverse(&self) -> Matrix {
        self.solve_matrix(&Matrix::identity(self.dim))
    }
}
