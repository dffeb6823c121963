use std::ops::{Index, IndexMut};

use crate::error::{invalid, Result};
use crate::flops;
use crate::scalar::{axpy, dot, Scalar};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from row-major entries; rejects length mismatches and
    /// non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(invalid!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            ));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(invalid!("matrix entries must be finite"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diag(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[T]) {
        debug_assert_eq!(values.len(), self.rows);
        for (i, &v) in values.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    /// Copies rows `start..end` into a new matrix.
    pub fn row_block(&self, start: usize, end: usize) -> Self {
        Self {
            rows: end - start,
            cols: self.cols,
            data: self.data[start * self.cols..end * self.cols].to_vec(),
        }
    }

    /// Copies the leading `k` columns.
    pub fn leading_columns(&self, k: usize) -> Self {
        Self::from_fn(self.rows, k, |i, j| self[(i, j)])
    }

    /// Stacks `self` on top of `below`.
    pub fn vstack(&self, below: &Self) -> Result<Self> {
        if self.cols != below.cols {
            return Err(invalid!(
                "cannot stack {} columns on {} columns",
                self.cols,
                below.cols
            ));
        }
        let mut data = Vec::with_capacity(self.data.len() + below.data.len());
        data.extend_from_slice(&self.data);
        data.extend_from_slice(&below.data);
        Ok(Self {
            rows: self.rows + below.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(invalid!(
                "matmul shape mismatch: {:?} x {:?}",
                self.shape(),
                other.shape()
            ));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a = self.row(i);
            let o = out.row_mut(i);
            for (k, &aik) in a.iter().enumerate() {
                if aik != T::zero() {
                    axpy(aik, other.row(k), o);
                }
            }
        }
        flops::count(self.rows * self.cols * other.cols);
        Ok(out)
    }

    /// `selfᵀ * other` without forming the transpose.
    pub fn t_matmul(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(invalid!(
                "t_matmul shape mismatch: {:?}ᵀ x {:?}",
                self.shape(),
                other.shape()
            ));
        }
        let mut out = Self::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let a = self.row(k);
            let b = other.row(k);
            for (i, &aki) in a.iter().enumerate() {
                axpy(aki, b, out.row_mut(i));
            }
        }
        flops::count(self.rows * self.cols * other.cols);
        Ok(out)
    }

    /// `self * otherᵀ` without forming the transpose.
    pub fn matmul_t(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(invalid!(
                "matmul_t shape mismatch: {:?} x {:?}ᵀ",
                self.shape(),
                other.shape()
            ));
        }
        let out = Self::from_fn(self.rows, other.rows, |i, j| dot(self.row(i), other.row(j)));
        flops::count(self.rows * self.cols * other.rows);
        Ok(out)
    }

    /// Scales column `j` by `diag[j]`.
    pub fn scale_columns(&self, diag: &[T]) -> Self {
        debug_assert_eq!(diag.len(), self.cols);
        let mut out = self.clone();
        for i in 0..self.rows {
            for (x, &d) in out.row_mut(i).iter_mut().zip(diag) {
                *x *= d;
            }
        }
        out
    }

    pub fn scale(&self, alpha: T) -> Self {
        self.map(|x| x * alpha)
    }

    pub fn map(&self, mut f: impl FnMut(T) -> T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(invalid!(
                "shape mismatch: {:?} vs {:?}",
                self.shape(),
                other.shape()
            ));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn frobenius_norm_sq(&self) -> T {
        self.data.iter().map(|&x| x * x).sum()
    }

    pub fn frobenius_norm(&self) -> T {
        self.frobenius_norm_sq().sqrt()
    }

    /// `‖self − other‖_F` without allocating.
    pub fn distance_to(&self, other: &Self) -> Result<T> {
        if self.shape() != other.shape() {
            return Err(invalid!(
                "shape mismatch: {:?} vs {:?}",
                self.shape(),
                other.shape()
            ));
        }
        let s: T = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum();
        Ok(s.sqrt())
    }

    /// Frobenius inner product `⟨self, other⟩`.
    pub fn inner(&self, other: &Self) -> Result<T> {
        if self.shape() != other.shape() {
            return Err(invalid!(
                "shape mismatch: {:?} vs {:?}",
                self.shape(),
                other.shape()
            ));
        }
        Ok(dot(&self.data, &other.data))
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Largest row ℓ2 norm, `‖A‖_{2,∞}`.
    pub fn max_row_norm(&self) -> T {
        (0..self.rows)
            .map(|i| crate::scalar::norm_sq(self.row(i)).sqrt())
            .fold(T::zero(), T::max)
    }

    /// `‖AᵀA − I‖_F`, the departure of the columns from orthonormality.
    pub fn orthonormality_defect(&self) -> T {
        let gram = self
            .t_matmul(self)
            .expect("gram of a matrix with itself is always conformant");
        let mut s = T::zero();
        for i in 0..self.cols {
            for j in 0..self.cols {
                let target = if i == j { T::one() } else { T::zero() };
                let d = gram[(i, j)] - target;
                s += d * d;
            }
        }
        s.sqrt()
    }

    pub fn cast<U: Scalar>(&self) -> DenseMatrix<U> {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| U::lit(x.as_f64())).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: usize, cols: usize, v: &[f64]) -> DenseMatrix<f64> {
        DenseMatrix::from_row_major(rows, cols, v.to_vec()).unwrap()
    }

    #[test]
    fn rejects_bad_lengths_and_nan() {
        assert!(DenseMatrix::<f64>::from_row_major(2, 2, vec![1.0; 3]).is_err());
        assert!(DenseMatrix::from_row_major(1, 2, vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn products_agree() {
        let a = m(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let b = m(3, 2, &[7.0, 8.0, 9.0, 10.0, 11.0, 12.0]);
        let ab = a.matmul(&b).unwrap();
        assert_eq!(ab.as_slice(), &[58.0, 64.0, 139.0, 154.0]);
        assert_eq!(a.transpose().t_matmul(&b).unwrap(), ab);
        assert_eq!(a.matmul_t(&b.transpose()).unwrap(), ab);
        assert!(a.matmul(&a).is_err());
    }

    #[test]
    fn norms_and_stacking() {
        let a = m(2, 2, &[3.0, 4.0, 0.0, 0.0]);
        assert_eq!(a.frobenius_norm(), 5.0);
        assert_eq!(a.max_row_norm(), 5.0);
        let s = a.vstack(&DenseMatrix::identity(2)).unwrap();
        assert_eq!(s.shape(), (4, 2));
        assert_eq!(s.row_block(2, 4), DenseMatrix::identity(2));
        assert_eq!(DenseMatrix::<f64>::identity(3).orthonormality_defect(), 0.0);
    }
}
