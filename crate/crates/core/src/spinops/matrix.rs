//! Dense square complex matrices.
//!
//! Storage is row-major. Products go through `faer` with sequential
//! parallelism so results are bitwise reproducible regardless of how many
//! workers run concurrently.

use std::ops::{Index, IndexMut};

use faer::linalg::matmul::matmul;
use faer::{Accum, MatMut, MatRef, Par};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} entries cannot form a {dim}x{dim} matrix",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch("ragged rows".into()));
            }
            data.extend(row.iter().map(|&x| Complex64::new(x, 0.0)));
        }
        Self::from_row_major(dim, data)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = d;
        }
        m
    }

    /// The projector `|v><v|` (no normalization applied).
    pub fn outer(v: &[Complex64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    pub(crate) fn from_faer(m: MatRef<'_, Complex64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        Self::from_fn(m.nrows(), |i, j| m[(i, j)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_faer(&self) -> MatRef<'_, Complex64> {
        MatRef::from_row_major_slice(&self.data, self.dim, self.dim)
    }

    pub fn as_faer_mut(&mut self) -> MatMut<'_, Complex64> {
        MatMut::from_row_major_slice_mut(&mut self.data, self.dim, self.dim)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let mut out = Self::zeros(self.dim);
        matmul(
            out.as_faer_mut(),
            Accum::Replace,
            self.as_faer(),
            rhs.as_faer(),
            ONE,
            Par::Seq,
        );
        out
    }

    /// `self * rhs * self^dagger`.
    pub fn conjugate(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "conjugate dimension mismatch");
        let left = self.matmul(rhs);
        let mut out = Self::zeros(self.dim);
        matmul(
            out.as_faer_mut(),
            Accum::Replace,
            left.as_faer(),
            self.as_faer().adjoint(),
            ONE,
            Par::Seq,
        );
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * factor).collect(),
        }
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.dim, rhs.dim, "elementwise dimension mismatch");
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// `Tr[self * rhs]` without forming the product.
    pub fn trace_product(&self, rhs: &Self) -> Complex64 {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self.data[i * n + k] * rhs.data[k * n + i];
            }
        }
        acc
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        assert_eq!(self.dim, rhs.dim);
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |A - A^dagger|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// True when every entry has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.data.iter().all(|x| x.im == 0.0)
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let n = self.dim;
        (0..n).all(|i| (0..n).all(|j| i == j || self.data[i * n + j].norm() <= tol))
    }

    /// Checks that the columns form a unitary matrix, returning `max |U^dagger U - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        let mut gram = Self::zeros(self.dim);
        matmul(
            gram.as_faer_mut(),
            Accum::Replace,
            self.as_faer().adjoint(),
            self.as_faer(),
            ONE,
            Par::Seq,
        );
        gram.max_abs_diff(&Self::identity(self.dim))
    }

    /// `Tr[A^dagger A]`, which is `Tr[A^2]` for Hermitian `A`.
    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Tensor product `a ⊗ b`; `a` supplies the more significant index.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim, b.dim);
    let n = da * db;
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..da {
        for j in 0..da {
            let aij = a.data[i * da + j];
            if aij == ZERO {
                continue;
            }
            for k in 0..db {
                let row = (i * db + k) * n + j * db;
                for l in 0..db {
                    out.data[row + l] = aij * b.data[k * db + l];
                }
            }
        }
    }
    out
}

pub fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| x * y))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kron_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_zz_sign_pattern() {
        let z = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap();
        let zz = kron(&z, &z);
        let expected = ComplexMatrix::from_diagonal(&[c(1., 0.), c(-1., 0.), c(-1., 0.), c(1., 0.)]);
        assert_eq!(zz, expected);
    }

    #[test]
    fn kron_dimensions_multiply() {
        let a = ComplexMatrix::identity(4);
        let b = ComplexMatrix::identity(8);
        assert_eq!(kron(&a, &b).dim(), 32);
    }

    #[test]
    fn matmul_matches_naive() {
        let a = ComplexMatrix::from_fn(5, |i, j| c(i as f64 - 0.5 * j as f64, (i * j) as f64 * 0.1));
        let b = ComplexMatrix::from_fn(5, |i, j| c((i + 2 * j) as f64, -(i as f64)));
        let prod = a.matmul(&b);
        for i in 0..5 {
            for j in 0..5 {
                let naive: Complex64 = (0..5).map(|k| a[(i, k)] * b[(k, j)]).sum();
                assert!((prod[(i, j)] - naive).norm() < 1e-12);
            }
        }
        assert!((a.trace_product(&b) - prod.trace()).norm() < 1e-10);
    }

    #[test]
    fn rejects_wrong_entry_count() {
        assert!(ComplexMatrix::from_row_major(3, vec![ZERO; 8]).is_err());
    }
}
