//! Small dense factorizations: Householder QR, one-sided Jacobi SVD and
//! Cholesky. All are written against column storage for cache locality.

use super::{DenseMatrix, SvdResult};
use crate::error::{invalid, Error, Result};
use crate::flops;
use crate::scalar::{axpy, dot, norm_sq, Scalar};

const MAX_JACOBI_SWEEPS: usize = 80;

fn to_columns<T: Scalar>(a: &DenseMatrix<T>) -> Vec<Vec<T>> {
    (0..a.cols()).map(|j| a.column(j)).collect()
}

fn from_columns<T: Scalar>(rows: usize, cols: &[Vec<T>]) -> DenseMatrix<T> {
    DenseMatrix::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

/// Thin Householder QR of an `m × n` matrix with `m ≥ n`.
///
/// Returns `(Q, R)` with `Q` of shape `m × n` having orthonormal columns and
/// `R` upper triangular `n × n`. Rank-deficient input still yields an
/// orthonormal `Q`.
pub fn thin_qr<T: Scalar>(a: &DenseMatrix<T>) -> Result<(DenseMatrix<T>, DenseMatrix<T>)> {
    let (m, n) = a.shape();
    if m < n {
        return Err(invalid!("thin QR needs rows >= cols, got {m}x{n}"));
    }
    let mut cols = to_columns(a);
    let mut reflectors: Vec<Vec<T>> = Vec::with_capacity(n);
    let mut r = DenseMatrix::zeros(n, n);
    let two = T::lit(2.0);

    for k in 0..n {
        let x = &cols[k][k..];
        let alpha = norm_sq(x).sqrt();
        let mut v = x.to_vec();
        // Reflect onto -sign(x0)·‖x‖·e1 to avoid cancellation.
        let beta = if v[0] >= T::zero() { -alpha } else { alpha };
        v[0] -= beta;
        let vnorm_sq = norm_sq(&v);
        if vnorm_sq > T::zero() {
            for col in cols.iter_mut().skip(k) {
                let tail = &mut col[k..];
                let s = two * dot(&v, tail) / vnorm_sq;
                axpy(-s, &v, tail);
            }
        }
        for (i, col) in cols.iter().enumerate().skip(k) {
            r[(k, i)] = col[k];
        }
        reflectors.push(if vnorm_sq > T::zero() { v } else { Vec::new() });
    }

    // Q = H_0 H_1 … H_{n-1} applied to the leading n columns of I.
    let mut q: Vec<Vec<T>> = (0..n)
        .map(|j| {
            let mut e = vec![T::zero(); m];
            e[j] = T::one();
            e
        })
        .collect();
    for k in (0..n).rev() {
        let v = &reflectors[k];
        if v.is_empty() {
            continue;
        }
        let vnorm_sq = norm_sq(v);
        for col in q.iter_mut() {
            let tail = &mut col[k..];
            let s = two * dot(v, tail) / vnorm_sq;
            axpy(-s, v, tail);
        }
    }
    flops::count(4 * m * n * n);
    Ok((from_columns(m, &q), r))
}

/// Orthonormal basis for the column span (thin Householder `Q`).
pub fn orthonormalize<T: Scalar>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    Ok(thin_qr(a)?.0)
}

/// One-sided (Hestenes) Jacobi SVD of an `m × n` matrix with `m ≥ n`.
///
/// Returns all `n` singular triplets sorted by decreasing singular value,
/// with the largest-magnitude entry of every left singular vector made
/// positive.
fn jacobi_tall<T: Scalar>(a: &DenseMatrix<T>) -> Result<SvdResult<T>> {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    if !a.is_finite() {
        return Err(Error::NumericalFailure(
            "non-finite entry passed to SVD".into(),
        ));
    }
    let mut cols = to_columns(a);
    let mut v: Vec<Vec<T>> = (0..n)
        .map(|j| {
            let mut e = vec![T::zero(); n];
            e[j] = T::one();
            e
        })
        .collect();
    let eps = T::epsilon();
    let tol = eps * T::from_usize_lossy(m).sqrt();
    let tiny = T::min_positive_value().sqrt();

    let mut converged = n < 2;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_JACOBI_SWEEPS {
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha = norm_sq(&cols[p]);
                let beta = norm_sq(&cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma.abs() <= tol * (alpha * beta).sqrt() || gamma.abs() < tiny {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        flops::count(n * (n - 1) / 2 * 6 * (m + n));
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NumericalFailure(format!(
            "Jacobi SVD did not converge in {MAX_JACOBI_SWEEPS} sweeps"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<T> = cols.iter().map(|c| norm_sq(c).sqrt()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());
    let sigma_max = norms.get(order[0]).copied().unwrap_or_else(T::zero);
    let null_tol = sigma_max * eps * T::from_usize_lossy(m.max(1));

    let mut sigma = Vec::with_capacity(n);
    let mut left: Vec<Vec<T>> = Vec::with_capacity(n);
    let mut right: Vec<Vec<T>> = Vec::with_capacity(n);
    let mut null_slots = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        let s = norms[j];
        sigma.push(s);
        if s > null_tol && s > T::zero() {
            left.push(cols[j].iter().map(|&x| x / s).collect());
        } else {
            left.push(Vec::new());
            null_slots.push(slot);
        }
        right.push(v[j].clone());
    }
    complete_basis(&mut left, &null_slots, m);

    let mut u = from_columns(m, &left);
    let mut vv = from_columns(n, &right);
    fix_signs(&mut u, &mut vv);
    Ok(SvdResult::from_parts_unchecked(u, sigma, vv))
}

#[inline]
fn rotate<T: Scalar>(cols: &mut [Vec<T>], p: usize, q: usize, c: T, s: T) {
    let (lo, hi) = cols.split_at_mut(q);
    let (x, y) = (&mut lo[p], &mut hi[0]);
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let a = *xi;
        let b = *yi;
        *xi = c * a - s * b;
        *yi = s * a + c * b;
    }
}

/// Fills the empty slots of `basis` with unit vectors orthogonal to every
/// other column, drawing candidates from the canonical basis.
fn complete_basis<T: Scalar>(basis: &mut [Vec<T>], slots: &[usize], dim: usize) {
    let mut candidate = 0;
    for &slot in slots {
        while candidate < dim {
            let mut e = vec![T::zero(); dim];
            e[candidate] = T::one();
            candidate += 1;
            // Two passes of Gram-Schmidt for orthogonality to working precision.
            for _ in 0..2 {
                for other in basis.iter().filter(|b| !b.is_empty()) {
                    let proj = dot(other, &e);
                    axpy(-proj, other, &mut e);
                }
            }
            let nrm = norm_sq(&e).sqrt();
            if nrm > T::lit(0.5) {
                basis[slot] = e.into_iter().map(|x| x / nrm).collect();
                break;
            }
        }
    }
}

/// Flips singular vector pairs so each left vector's largest-magnitude
/// entry is positive.
pub(crate) fn fix_signs<T: Scalar>(u: &mut DenseMatrix<T>, v: &mut DenseMatrix<T>) {
    for j in 0..u.cols() {
        let mut best = T::zero();
        for i in 0..u.rows() {
            let x = u[(i, j)];
            if x.abs() > best.abs() {
                best = x;
            }
        }
        if best < T::zero() {
            for i in 0..u.rows() {
                u[(i, j)] = -u[(i, j)];
            }
            for i in 0..v.rows() {
                v[(i, j)] = -v[(i, j)];
            }
        }
    }
}

/// Full thin SVD of a dense matrix: `min(rows, cols)` triplets.
pub fn dense_svd<T: Scalar>(a: &DenseMatrix<T>) -> Result<SvdResult<T>> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(invalid!("SVD of an empty {:?} matrix", a.shape()));
    }
    if a.rows() >= a.cols() {
        jacobi_tall(a)
    } else {
        let t = jacobi_tall(&a.transpose())?;
        let (v, sigma, u) = t.into_parts();
        let (mut u, mut v) = (u, v);
        fix_signs(&mut u, &mut v);
        Ok(SvdResult::from_parts_unchecked(u, sigma, v))
    }
}

/// Solves `A x = b` for symmetric positive definite `A` by Cholesky.
///
/// Returns `None` when `A` is not numerically positive definite.
pub fn cholesky_solve<T: Scalar>(a: &DenseMatrix<T>, b: &[T]) -> Option<Vec<T>> {
    let n = a.rows();
    debug_assert_eq!(a.cols(), n);
    debug_assert_eq!(b.len(), n);
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)] - norm_sq(&l.row(j)[..j]);
        if !(d > T::zero()) {
            return None;
        }
        d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let s = a[(i, j)] - dot(&l.row(i)[..j], &l.row(j)[..j]);
            l[(i, j)] = s / d;
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        let s = dot(&l.row(i)[..i], &y[..i]);
        y[i] = (y[i] - s) / l[(i, i)];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[(k, i)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    flops::count(n * n * n / 6 + 2 * n * n);
    Some(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(rows: usize, cols: usize, seed: u64) -> DenseMatrix<f64> {
        // Small deterministic LCG; independent of the crate's RNG plumbing.
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        DenseMatrix::from_fn(rows, cols, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        })
    }

    #[test]
    fn qr_reconstructs_and_is_orthonormal() {
        let a = sample(9, 4, 1);
        let (q, r) = thin_qr(&a).unwrap();
        assert!(q.orthonormality_defect() < 1e-13);
        let back = q.matmul(&r).unwrap();
        assert!(back.distance_to(&a).unwrap() < 1e-13);
        for i in 0..4 {
            for j in 0..i {
                assert_eq!(r[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn qr_of_rank_deficient_input_stays_orthonormal() {
        let mut a = sample(6, 3, 2);
        for i in 0..6 {
            a[(i, 2)] = a[(i, 0)] * 2.0;
        }
        let (q, _) = thin_qr(&a).unwrap();
        assert!(q.orthonormality_defect() < 1e-13);
        let (q0, _) = thin_qr(&DenseMatrix::<f64>::zeros(5, 2)).unwrap();
        assert!(q0.orthonormality_defect() < 1e-14);
    }

    #[test]
    fn jacobi_svd_wide_and_tall() {
        for &(r, c) in &[(7, 4), (4, 7), (5, 5)] {
            let a = sample(r, c, (r * 10 + c) as u64);
            let svd = dense_svd(&a).unwrap();
            assert!(svd.u().orthonormality_defect() < 1e-12);
            assert!(svd.v().orthonormality_defect() < 1e-12);
            assert!(svd.reconstruct().distance_to(&a).unwrap() < 1e-12);
            assert!(svd.sigma().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn zero_matrix_has_orthonormal_factors() {
        let svd = dense_svd(&DenseMatrix::<f64>::zeros(4, 3)).unwrap();
        assert_eq!(svd.sigma(), &[0.0, 0.0, 0.0]);
        assert!(svd.u().orthonormality_defect() < 1e-14);
        assert!(svd.v().orthonormality_defect() < 1e-14);
    }

    #[test]
    fn cholesky_solves_spd() {
        let b = sample(5, 3, 9);
        let a = b.t_matmul(&b).unwrap();
        let x = cholesky_solve(&a, &[1.0, 2.0, 3.0]).unwrap();
        for i in 0..3 {
            let ax: f64 = (0..3).map(|j| a[(i, j)] * x[j]).sum();
            assert!((ax - (i + 1) as f64).abs() < 1e-10);
        }
        assert!(cholesky_solve(&DenseMatrix::<f64>::zeros(2, 2), &[1.0, 1.0]).is_none());
    }
}
