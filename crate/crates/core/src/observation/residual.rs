use super::ObservationSet;
use crate::error::{invalid, Result};
use crate::flops;
use crate::linalg::{DenseMatrix, LinearOperator};
use crate::model::FactorZ;
use crate::scalar::{axpy, dot, Scalar};

/// An `n1 × n2` matrix supported on `Ω`, sharing the index set of its
/// [`ObservationSet`]. Entries outside `Ω` are implicitly zero.
#[derive(Clone, Debug)]
pub struct SparseResidual<'a, T> {
    obs: &'a ObservationSet<T>,
    values: Vec<T>,
}

impl<'a, T: Scalar> SparseResidual<'a, T> {
    pub(crate) fn new(obs: &'a ObservationSet<T>, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), obs.len());
        Self { obs, values }
    }

    pub fn observations(&self) -> &'a ObservationSet<T> {
        self.obs
    }

    /// Values aligned with `observations().indices()`.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn frobenius_norm_sq(&self) -> T {
        self.values.iter().map(|&v| v * v).sum()
    }

    pub fn frobenius_norm(&self) -> T {
        self.frobenius_norm_sq().sqrt()
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut out = DenseMatrix::zeros(self.obs.n1(), self.obs.n2());
        for (&(i, j), &v) in self.obs.indices().iter().zip(&self.values) {
            out[(i, j)] = v;
        }
        out
    }
}

/// `scale · P_Ω(Z_U Z_Vᵀ − X⋆)` evaluated only on `Ω`, in `O(m·r)`.
pub fn residual_on_omega<'a, T: Scalar>(
    obs: &'a ObservationSet<T>,
    z: &FactorZ<T>,
    scale: T,
) -> Result<SparseResidual<'a, T>> {
    if z.n1() != obs.n1() || z.n2() != obs.n2() {
        return Err(invalid!(
            "factor blocks {}+{} do not match a {}x{} observation set",
            z.n1(),
            z.n2(),
            obs.n1(),
            obs.n2()
        ));
    }
    let values = obs
        .indices()
        .iter()
        .zip(obs.values())
        .map(|(&(i, j), &x)| scale * (dot(z.u_row(i), z.v_row(j)) - x))
        .collect();
    flops::count(obs.len() * (z.rank() + 1));
    Ok(SparseResidual::new(obs, values))
}

impl<T: Scalar> LinearOperator<T> for SparseResidual<'_, T> {
    fn nrows(&self) -> usize {
        self.obs.n1()
    }

    fn ncols(&self) -> usize {
        self.obs.n2()
    }

    fn apply(&self, x: &DenseMatrix<T>) -> DenseMatrix<T> {
        assert_eq!(x.rows(), self.obs.n2(), "sparse apply: block has wrong height");
        let mut out = DenseMatrix::zeros(self.obs.n1(), x.cols());
        for (&(i, j), &v) in self.obs.indices().iter().zip(&self.values) {
            axpy(v, x.row(j), out.row_mut(i));
        }
        flops::count(self.values.len() * x.cols());
        out
    }

    fn apply_adjoint(&self, y: &DenseMatrix<T>) -> DenseMatrix<T> {
        assert_eq!(y.rows(), self.obs.n1(), "sparse adjoint: block has wrong height");
        let mut out = DenseMatrix::zeros(self.obs.n2(), y.cols());
        for (&(i, j), &v) in self.obs.indices().iter().zip(&self.values) {
            axpy(v, y.row(i), out.row_mut(j));
        }
        flops::count(self.values.len() * y.cols());
        out
    }

    fn to_dense(&self) -> DenseMatrix<T> {
        SparseResidual::to_dense(self)
    }
}
