use super::decomp::{dense_svd, fix_signs, orthonormalize};
use super::{DenseMatrix, LinearOperator};
use crate::error::{invalid, Error, Result};
use crate::rng::{gaussian_matrix, seeded};
use crate::scalar::Scalar;

/// Sketch oversampling used when callers have no reason to pick another.
pub const DEFAULT_OVERSAMPLE: usize = 10;
/// Power (subspace) iterations used when callers have no reason to pick another.
pub const DEFAULT_POWER_ITERS: usize = 2;
/// Below this smaller dimension the dense Jacobi path is used directly.
pub const DENSE_FALLBACK_DIM: usize = 32;

/// Rank-`r` singular triplet `(U, Σ, V)` with `σ₁ ≥ … ≥ σ_r ≥ 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SvdResult<T> {
    u: DenseMatrix<T>,
    sigma: Vec<T>,
    v: DenseMatrix<T>,
}

impl<T: Scalar> SvdResult<T> {
    /// Validates shapes, ordering and orthonormality (within `1e-8·√r`).
    pub fn new(u: DenseMatrix<T>, sigma: Vec<T>, v: DenseMatrix<T>) -> Result<Self> {
        let r = sigma.len();
        if u.cols() != r || v.cols() != r {
            return Err(invalid!(
                "SVD factors have {} and {} columns for {r} singular values",
                u.cols(),
                v.cols()
            ));
        }
        if sigma.iter().any(|&s| !(s >= T::zero()) || !s.is_finite()) {
            return Err(invalid!("singular values must be finite and nonnegative"));
        }
        if sigma.windows(2).any(|w| w[0] < w[1]) {
            return Err(invalid!("singular values must be nonincreasing"));
        }
        let tol = orthonormality_tol::<T>(r);
        if u.orthonormality_defect() > tol || v.orthonormality_defect() > tol {
            return Err(invalid!("singular vectors are not orthonormal"));
        }
        Ok(Self { u, sigma, v })
    }

    pub(crate) fn from_parts_unchecked(u: DenseMatrix<T>, sigma: Vec<T>, v: DenseMatrix<T>) -> Self {
        Self { u, sigma, v }
    }

    pub fn u(&self) -> &DenseMatrix<T> {
        &self.u
    }

    pub fn v(&self) -> &DenseMatrix<T> {
        &self.v
    }

    pub fn sigma(&self) -> &[T] {
        &self.sigma
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn into_parts(self) -> (DenseMatrix<T>, Vec<T>, DenseMatrix<T>) {
        (self.u, self.sigma, self.v)
    }

    /// Keeps the leading `r` triplets.
    pub fn truncate(&self, r: usize) -> Self {
        let r = r.min(self.rank());
        Self {
            u: self.u.leading_columns(r),
            sigma: self.sigma[..r].to_vec(),
            v: self.v.leading_columns(r),
        }
    }

    /// `U Σ Vᵀ` as a dense matrix.
    pub fn reconstruct(&self) -> DenseMatrix<T> {
        self.u
            .scale_columns(&self.sigma)
            .matmul_t(&self.v)
            .expect("SVD factors share their column count")
    }
}

/// Orthonormality slack allowed by the `SvdResult` invariant.
pub fn orthonormality_tol<T: Scalar>(r: usize) -> T {
    let base = if T::epsilon() < T::lit(1e-10) { 1e-8 } else { 1e-3 };
    T::lit(base * (r.max(1) as f64).sqrt())
}

/// Rank-`r` SVD of a matrix-free operator by randomized range finding with
/// subspace (power) iteration.
///
/// The operator is sketched with a Gaussian test matrix of `r + oversample`
/// columns drawn from `seed`, refined by `power_iters` rounds of
/// re-orthonormalized `A Aᵀ` products, and the small projected matrix is
/// decomposed densely. Operators whose smaller dimension is at most
/// [`DENSE_FALLBACK_DIM`] are materialized and decomposed directly.
pub fn randomized_rank_r_svd<T: Scalar, A: LinearOperator<T> + ?Sized>(
    apply: &A,
    r: usize,
    oversample: usize,
    power_iters: usize,
    seed: u64,
) -> Result<SvdResult<T>> {
    let (n1, n2) = (apply.nrows(), apply.ncols());
    let min_dim = n1.min(n2);
    if r == 0 || r > min_dim {
        return Err(invalid!("rank {r} invalid for a {n1}x{n2} operator"));
    }

    if min_dim <= DENSE_FALLBACK_DIM {
        let dense = apply.to_dense();
        return dense_svd(&dense).map(|s| s.truncate(r));
    }

    let k = (r + oversample).min(min_dim);
    let mut rng = seeded(seed);
    let omega: DenseMatrix<T> = gaussian_matrix(n2, k, &mut rng);

    let mut q = orthonormalize(&checked(apply.apply(&omega))?)?;
    for _ in 0..power_iters {
        let w = orthonormalize(&checked(apply.apply_adjoint(&q))?)?;
        q = orthonormalize(&checked(apply.apply(&w))?)?;
    }
    // Bᵀ = Aᵀ Q is n2 × k; its SVD Bᵀ = L Σ Rᵀ gives A ≈ (Q R) Σ Lᵀ.
    let bt = checked(apply.apply_adjoint(&q))?;
    let small = dense_svd(&bt)?;
    let (l, sigma, rr) = small.into_parts();
    let mut u = q.matmul(&rr.leading_columns(r))?;
    let mut v = l.leading_columns(r);
    fix_signs(&mut u, &mut v);
    Ok(SvdResult::from_parts_unchecked(u, sigma[..r].to_vec(), v))
}

fn checked<T: Scalar>(m: DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if m.is_finite() {
        Ok(m)
    } else {
        Err(Error::NumericalFailure(
            "non-finite value produced by operator application".into(),
        ))
    }
}

const POWER_MAX_ITERS: usize = 5000;

/// Largest singular value `‖A‖₂`.
///
/// Small matrices go through the dense SVD; larger ones use power iteration
/// on `AᵀA` started from a fixed, deterministic vector.
pub fn spectral_norm<T: Scalar>(a: &DenseMatrix<T>) -> Result<T> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(invalid!("spectral norm of an empty matrix"));
    }
    if !a.is_finite() {
        return Err(Error::NumericalFailure(
            "non-finite entry passed to spectral_norm".into(),
        ));
    }
    if a.rows().min(a.cols()) <= DENSE_FALLBACK_DIM {
        return Ok(dense_svd(a)?.sigma()[0]);
    }

    let n = a.cols();
    // Irrational-ish weights keep the start vector off any coordinate subspace.
    let mut x = DenseMatrix::from_fn(n, 1, |i, _| {
        T::one() + T::lit(((i as f64 + 1.0) * 0.618_033_988_749_895).fract())
    });
    let mut estimate = T::zero();
    for _ in 0..POWER_MAX_ITERS {
        let nrm = x.frobenius_norm();
        if nrm == T::zero() {
            return Ok(T::zero());
        }
        x = x.scale(T::one() / nrm);
        let y = a.matmul(&x)?;
        let next = y.frobenius_norm();
        x = a.t_matmul(&y)?;
        if (next - estimate).abs() <= T::epsilon() * T::lit(4.0) * next {
            return Ok(next);
        }
        estimate = next;
    }
    Ok(estimate)
}
