//! Synthetic ground-truth low-rank matrices with known spectra.

use crate::error::{invalid, Result};
use crate::linalg::{orthonormalize, DenseMatrix, SvdResult};
use crate::model::{incoherence_mu, lift, FactorZ};
use crate::rng::{gaussian_matrix, seeded};
use crate::scalar::{dot, Scalar};

/// Largest `n1·n2` for which [`LowRankInstance::dense`] materializes `X⋆`.
pub const DENSE_LIMIT: usize = 1 << 24;

/// Ground truth `X⋆ = U⋆ Σ⋆ V⋆ᵀ` together with its incoherence and
/// condition number.
#[derive(Clone, Debug)]
pub struct LowRankInstance<T> {
    svd: SvdResult<T>,
    /// `U⋆Σ⋆`, cached for the entry oracle.
    u_sigma: DenseMatrix<T>,
    mu: T,
    kappa: T,
    seed: Option<u64>,
}

impl<T: Scalar> LowRankInstance<T> {
    /// Wraps an existing SVD; singular values must be strictly positive.
    pub fn from_svd(svd: SvdResult<T>) -> Result<Self> {
        let sigma = svd.sigma();
        if sigma.is_empty() || sigma.iter().any(|&s| !(s > T::zero())) {
            return Err(invalid!("ground-truth singular values must be positive"));
        }
        let mu = incoherence_mu(&svd, svd.u().rows(), svd.v().rows())?;
        let kappa = sigma[0] / sigma[sigma.len() - 1];
        let u_sigma = svd.u().scale_columns(sigma);
        Ok(Self {
            svd,
            u_sigma,
            mu,
            kappa,
            seed: None,
        })
    }

    pub fn n1(&self) -> usize {
        self.svd.u().rows()
    }

    pub fn n2(&self) -> usize {
        self.svd.v().rows()
    }

    pub fn rank(&self) -> usize {
        self.svd.rank()
    }

    pub fn svd(&self) -> &SvdResult<T> {
        &self.svd
    }

    pub fn u_star(&self) -> &DenseMatrix<T> {
        self.svd.u()
    }

    pub fn v_star(&self) -> &DenseMatrix<T> {
        self.svd.v()
    }

    pub fn sigma_star(&self) -> &[T] {
        self.svd.sigma()
    }

    pub fn sigma_max(&self) -> T {
        self.svd.sigma()[0]
    }

    pub fn sigma_min(&self) -> T {
        self.svd.sigma()[self.rank() - 1]
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn kappa(&self) -> T {
        self.kappa
    }

    /// Seed the instance was generated from, if any.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// `X⋆_ij = ⟨(U⋆Σ⋆)_i, V⋆_j⟩`.
    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> T {
        dot(self.u_sigma.row(i), self.svd.v().row(j))
    }

    /// Dense `X⋆`. Fails for matrices larger than [`DENSE_LIMIT`] entries.
    pub fn dense(&self) -> Result<DenseMatrix<T>> {
        if self.n1() * self.n2() > DENSE_LIMIT {
            return Err(invalid!(
                "refusing to materialize a {}x{} ground truth",
                self.n1(),
                self.n2()
            ));
        }
        self.u_sigma.matmul_t(self.svd.v())
    }

    /// `‖X⋆‖_F = ‖σ⋆‖₂`.
    pub fn frobenius_norm(&self) -> T {
        self.svd.sigma().iter().map(|&s| s * s).sum::<T>().sqrt()
    }

    /// The lifted factor `Z⋆ = [U⋆; V⋆]Σ⋆^{1/2}`.
    pub fn z_star(&self) -> FactorZ<T> {
        lift(&self.svd)
    }
}

/// Draws `U⋆`, `V⋆` as orthonormalized Gaussian matrices and spaces the
/// singular values linearly from `kappa` down to `1`.
pub fn generate_instance<T: Scalar>(
    n1: usize,
    n2: usize,
    r: usize,
    kappa: f64,
    seed: u64,
) -> Result<LowRankInstance<T>> {
    if r == 0 || r > n1.min(n2) {
        return Err(invalid!("rank {r} invalid for a {n1}x{n2} instance"));
    }
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(invalid!("condition number must be >= 1, got {kappa}"));
    }
    let mut rng = seeded(seed);
    let u = orthonormalize(&gaussian_matrix::<T>(n1, r, &mut rng))?;
    let v = orthonormalize(&gaussian_matrix::<T>(n2, r, &mut rng))?;
    let sigma: Vec<T> = (0..r)
        .map(|k| {
            if r == 1 {
                T::one()
            } else {
                let t = k as f64 / (r - 1) as f64;
                T::lit(kappa + (1.0 - kappa) * t)
            }
        })
        .collect();
    let svd = SvdResult::new(u, sigma, v)?;
    let mut inst = LowRankInstance::from_svd(svd)?;
    inst.seed = Some(seed);
    Ok(inst)
}
