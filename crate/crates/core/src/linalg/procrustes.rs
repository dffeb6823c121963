use super::decomp::dense_svd;
use super::DenseMatrix;
use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// Optimal orthogonal alignment of `z` onto `z_star`.
#[derive(Clone, Debug)]
pub struct Alignment<T> {
    /// Orthogonal `r × r` minimizer of `‖z − z_star·R‖_F`.
    pub rotation: DenseMatrix<T>,
    /// `‖z − z_star·rotation‖_F`.
    pub distance: T,
}

/// Orthogonal Procrustes: `R = A Bᵀ` where `A Λ Bᵀ` is the SVD of `z_starᵀ z`.
pub fn procrustes_align<T: Scalar>(
    z: &DenseMatrix<T>,
    z_star: &DenseMatrix<T>,
) -> Result<Alignment<T>> {
    if z.shape() != z_star.shape() {
        return Err(invalid!(
            "Procrustes shape mismatch: {:?} vs {:?}",
            z.shape(),
            z_star.shape()
        ));
    }
    if z.cols() == 0 {
        return Err(invalid!("Procrustes alignment needs at least one column"));
    }
    let cross = z_star.t_matmul(z)?;
    let svd = dense_svd(&cross)?;
    let rotation = svd.u().matmul_t(svd.v())?;
    let aligned = z_star.matmul(&rotation)?;
    let distance = z.distance_to(&aligned)?;
    Ok(Alignment { rotation, distance })
}
