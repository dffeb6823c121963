use super::DenseMatrix;
use crate::scalar::Scalar;

/// A linear map `A : ℝ^ncols → ℝ^nrows` applied to blocks of vectors.
///
/// Implementors only need forward and adjoint block products; the randomized
/// SVD never touches individual entries.
pub trait LinearOperator<T: Scalar> {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;

    /// `A · x` for `x` of shape `ncols × k`.
    fn apply(&self, x: &DenseMatrix<T>) -> DenseMatrix<T>;

    /// `Aᵀ · y` for `y` of shape `nrows × k`.
    fn apply_adjoint(&self, y: &DenseMatrix<T>) -> DenseMatrix<T>;

    /// Materializes the operator. Intended for small operators only.
    fn to_dense(&self) -> DenseMatrix<T> {
        if self.ncols() <= self.nrows() {
            self.apply(&DenseMatrix::identity(self.ncols()))
        } else {
            self.apply_adjoint(&DenseMatrix::identity(self.nrows()))
                .transpose()
        }
    }
}

impl<T: Scalar> LinearOperator<T> for DenseMatrix<T> {
    fn nrows(&self) -> usize {
        self.rows()
    }

    fn ncols(&self) -> usize {
        self.cols()
    }

    fn apply(&self, x: &DenseMatrix<T>) -> DenseMatrix<T> {
        self.matmul(x).expect("operator applied to a non-conforming block")
    }

    fn apply_adjoint(&self, y: &DenseMatrix<T>) -> DenseMatrix<T> {
        self.t_matmul(y)
            .expect("adjoint applied to a non-conforming block")
    }

    fn to_dense(&self) -> DenseMatrix<T> {
        self.clone()
    }
}

impl<T: Scalar, A: LinearOperator<T> + ?Sized> LinearOperator<T> for &A {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }

    fn ncols(&self) -> usize {
        (**self).ncols()
    }

    fn apply(&self, x: &DenseMatrix<T>) -> DenseMatrix<T> {
        (**self).apply(x)
    }

    fn apply_adjoint(&self, y: &DenseMatrix<T>) -> DenseMatrix<T> {
        (**self).apply_adjoint(y)
    }

    fn to_dense(&self) -> DenseMatrix<T> {
        (**self).to_dense()
    }
}
