use crate::error::{invalid, Result};
use crate::linalg::{DenseMatrix, SvdResult};
use crate::scalar::Scalar;

/// Lifted factor `Z = [Z_U; Z_V] ∈ ℝ^{(n1+n2)×r}`.
///
/// The top `n1` rows form `Z_U`, the bottom `n2` rows `Z_V`, and the
/// completed matrix is `Z_U Z_Vᵀ`.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorZ<T> {
    n1: usize,
    n2: usize,
    data: DenseMatrix<T>,
}

impl<T: Scalar> FactorZ<T> {
    pub fn zeros(n1: usize, n2: usize, r: usize) -> Self {
        Self {
            n1,
            n2,
            data: DenseMatrix::zeros(n1 + n2, r),
        }
    }

    pub fn from_blocks(zu: DenseMatrix<T>, zv: DenseMatrix<T>) -> Result<Self> {
        let (n1, n2) = (zu.rows(), zv.rows());
        if !zu.is_finite() || !zv.is_finite() {
            return Err(invalid!("factor entries must be finite"));
        }
        Ok(Self {
            n1,
            n2,
            data: zu.vstack(&zv)?,
        })
    }

    /// Wraps a stacked `(n1+n2) × r` matrix.
    pub fn from_matrix(n1: usize, n2: usize, data: DenseMatrix<T>) -> Result<Self> {
        if data.rows() != n1 + n2 {
            return Err(invalid!(
                "stacked factor has {} rows, expected {n1}+{n2}",
                data.rows()
            ));
        }
        if !data.is_finite() {
            return Err(invalid!("factor entries must be finite"));
        }
        Ok(Self { n1, n2, data })
    }

    pub(crate) fn from_matrix_unchecked(n1: usize, n2: usize, data: DenseMatrix<T>) -> Self {
        debug_assert_eq!(data.rows(), n1 + n2);
        Self { n1, n2, data }
    }

    #[inline]
    pub fn n1(&self) -> usize {
        self.n1
    }

    #[inline]
    pub fn n2(&self) -> usize {
        self.n2
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.data.cols()
    }

    #[inline]
    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.data
    }

    pub fn matrix_mut(&mut self) -> &mut DenseMatrix<T> {
        &mut self.data
    }

    pub fn into_matrix(self) -> DenseMatrix<T> {
        self.data
    }

    /// Row `i` of `Z_U`.
    #[inline]
    pub fn u_row(&self, i: usize) -> &[T] {
        self.data.row(i)
    }

    /// Row `j` of `Z_V`.
    #[inline]
    pub fn v_row(&self, j: usize) -> &[T] {
        self.data.row(self.n1 + j)
    }

    #[inline]
    pub fn u_row_mut(&mut self, i: usize) -> &mut [T] {
        self.data.row_mut(i)
    }

    #[inline]
    pub fn v_row_mut(&mut self, j: usize) -> &mut [T] {
        let n1 = self.n1;
        self.data.row_mut(n1 + j)
    }

    /// Copy of `Z_U`.
    pub fn top(&self) -> DenseMatrix<T> {
        self.data.row_block(0, self.n1)
    }

    /// Copy of `Z_V`.
    pub fn bottom(&self) -> DenseMatrix<T> {
        self.data.row_block(self.n1, self.n1 + self.n2)
    }

    /// The completed matrix `Z_U Z_Vᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix<T> {
        self.top()
            .matmul_t(&self.bottom())
            .expect("blocks share their column count")
    }

    /// `‖Z‖_{2,∞}`.
    pub fn max_row_norm(&self) -> T {
        self.data.max_row_norm()
    }

    pub fn is_finite(&self) -> bool {
        self.data.is_finite()
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if (self.n1, self.n2, self.rank()) != (other.n1, other.n2, other.rank()) {
            return Err(invalid!(
                "factor shapes differ: ({}+{})x{} vs ({}+{})x{}",
                self.n1,
                self.n2,
                self.rank(),
                other.n1,
                other.n2,
                other.rank()
            ));
        }
        Ok(())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self::from_matrix_unchecked(
            self.n1,
            self.n2,
            self.data.sub(&other.data)?,
        ))
    }

    /// `self + alpha·other`.
    pub fn add_scaled(&self, alpha: T, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        crate::scalar::axpy(alpha, other.data.as_slice(), out.data.as_mut_slice());
        crate::flops::count(self.data.as_slice().len());
        Ok(out)
    }

    /// Frobenius inner product.
    pub fn inner(&self, other: &Self) -> Result<T> {
        self.check_same_shape(other)?;
        self.data.inner(&other.data)
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.frobenius_norm()
    }

    /// Right-multiplies by an `r × r` matrix, e.g. an orthogonal rotation.
    pub fn rotate(&self, q: &DenseMatrix<T>) -> Result<Self> {
        Ok(Self::from_matrix_unchecked(
            self.n1,
            self.n2,
            self.data.matmul(q)?,
        ))
    }
}

/// `Z = [U Σ^{1/2}; V Σ^{1/2}]`, so that `Z_U Z_Vᵀ = U Σ Vᵀ`.
pub fn lift<T: Scalar>(svd: &SvdResult<T>) -> FactorZ<T> {
    let root: Vec<T> = svd.sigma().iter().map(|s| s.sqrt()).collect();
    let zu = svd.u().scale_columns(&root);
    let zv = svd.v().scale_columns(&root);
    FactorZ::from_matrix_unchecked(
        zu.rows(),
        zv.rows(),
        zu.vstack(&zv).expect("SVD factors share their column count"),
    )
}
