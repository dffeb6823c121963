//! Dense matrix primitives, randomized low-rank SVD and orthogonal
//! Procrustes alignment.

mod decomp;
mod dense;
mod operator;
mod procrustes;
mod svd;

pub use decomp::{cholesky_solve, dense_svd, orthonormalize, thin_qr};
pub use dense::DenseMatrix;
pub use operator::LinearOperator;
pub use procrustes::{procrustes_align, Alignment};
pub use svd::{
    orthonormality_tol, randomized_rank_r_svd, spectral_norm, SvdResult, DEFAULT_OVERSAMPLE,
    DEFAULT_POWER_ITERS, DENSE_FALLBACK_DIM,
};

use crate::error::Result;
use crate::scalar::Scalar;

/// `‖A Bᵀ − C Dᵀ‖_F` computed from the factors without forming either product.
///
/// Stacks `[A, −C]` and `[B, D]`, takes thin QR factors of both and returns
/// the Frobenius norm of the small product of triangular factors. Unlike the
/// trace expansion this does not lose relative accuracy when the two products
/// nearly cancel.
pub fn factored_difference_norm<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    c: &DenseMatrix<T>,
    d: &DenseMatrix<T>,
) -> Result<T> {
    let (n1, ka) = a.shape();
    let (n2, kc) = d.shape();
    if b.shape() != (n2, ka) || c.shape() != (n1, kc) {
        return Err(crate::error::invalid!(
            "factored difference shape mismatch: A{:?} B{:?} C{:?} D{:?}",
            a.shape(),
            b.shape(),
            c.shape(),
            d.shape()
        ));
    }
    let k = ka + kc;
    if k > n1 || k > n2 {
        let left = a.matmul_t(b)?;
        let right = c.matmul_t(d)?;
        return left.distance_to(&right);
    }
    let p = DenseMatrix::from_fn(n1, k, |i, j| if j < ka { a[(i, j)] } else { -c[(i, j - ka)] });
    let q = DenseMatrix::from_fn(n2, k, |i, j| if j < ka { b[(i, j)] } else { d[(i, j - ka)] });
    let (_, rp) = thin_qr(&p)?;
    let (_, rq) = thin_qr(&q)?;
    Ok(rp.matmul_t(&rq)?.frobenius_norm())
}
