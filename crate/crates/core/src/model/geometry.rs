use super::{gradient, FactorZ, ModelParams};
use crate::error::{invalid, Result};
use crate::flops;
use crate::instance::LowRankInstance;
use crate::linalg::{procrustes_align, SvdResult};
use crate::observation::ObservationSet;
use crate::scalar::{norm_sq, Scalar};

/// Row-wise clipping onto `{Z : ‖Z‖_{2,∞} ≤ radius}`.
///
/// Rows already inside the ball (including zero rows) are left untouched;
/// the rest are rescaled to norm exactly `radius`.
pub fn project_c<T: Scalar>(z: &FactorZ<T>, radius: T) -> FactorZ<T> {
    let mut out = z.clone();
    project_c_in_place(&mut out, radius);
    out
}

pub fn project_c_in_place<T: Scalar>(z: &mut FactorZ<T>, radius: T) {
    let m = z.matrix_mut();
    let rows = m.rows();
    for i in 0..rows {
        let row = m.row_mut(i);
        let nrm = norm_sq(row).sqrt();
        if nrm > radius {
            // Rounding can leave the rescaled row an ulp outside the ball,
            // which would break exact idempotence.
            let original = row.to_vec();
            let mut s = radius / nrm;
            loop {
                row.iter_mut().zip(&original).for_each(|(x, &o)| *x = o * s);
                if norm_sq(row).sqrt() <= radius {
                    break;
                }
                s *= T::one() - T::epsilon();
            }
        }
    }
    flops::count(2 * m.as_slice().len());
}

/// `μ = max((n1/r)‖U‖²_{2,∞}, (n2/r)‖V‖²_{2,∞})`.
pub fn incoherence_mu<T: Scalar>(svd: &SvdResult<T>, n1: usize, n2: usize) -> Result<T> {
    let (u, v) = (svd.u(), svd.v());
    if u.rows() != n1 || v.rows() != n2 {
        return Err(invalid!(
            "singular vectors are {}x{} and {}x{}, expected {n1} and {n2} rows",
            u.rows(),
            u.cols(),
            v.rows(),
            v.cols()
        ));
    }
    let r = svd.rank();
    if r == 0 {
        return Err(invalid!("incoherence of a rank-0 factorization"));
    }
    let tol = T::lit(1e-6).max(T::epsilon() * T::lit(100.0) * T::from_usize_lossy(r));
    if u.orthonormality_defect() > tol || v.orthonormality_defect() > tol {
        return Err(invalid!("incoherence requires orthonormal singular vectors"));
    }
    let rr = T::from_usize_lossy(r);
    let mu_u = T::from_usize_lossy(n1) / rr * u.max_row_norm().powi(2);
    let mu_v = T::from_usize_lossy(n2) / rr * v.max_row_norm().powi(2);
    Ok(mu_u.max(mu_v))
}

/// `d(Z, Z⋆) = min_{R orthogonal} ‖Z − Z⋆R‖_F`.
pub fn distance<T: Scalar>(z: &FactorZ<T>, z_star: &FactorZ<T>) -> Result<T> {
    if (z.n1(), z.n2()) != (z_star.n1(), z_star.n2()) {
        return Err(invalid!("factor block sizes differ"));
    }
    Ok(procrustes_align(z.matrix(), z_star.matrix())?.distance)
}

/// `α` of the regularity condition.
pub const RC_ALPHA: f64 = 512.0 / 99.0;
/// Multiplier of `μ²r²κ` in `β` of the regularity condition.
pub const RC_BETA_FACTOR: f64 = 13196.0;

/// One evaluation of the local regularity inequality
/// `⟨∇f(Z), H⟩ ≥ σ⋆_r‖H‖²/α + ‖∇f(Z)‖²/(β σ⋆₁)` with `H = Z − Z⋆R₀`.
#[derive(Clone, Debug)]
pub struct RcDiagnostic<T> {
    pub lhs: T,
    pub curvature_term: T,
    pub gradient_term: T,
    pub alpha: T,
    pub beta: T,
    pub distance: T,
    pub satisfied: bool,
}

/// Evaluates the regularity inequality at `z` against the ground truth.
pub fn rc_diagnostic<T: Scalar>(
    z: &FactorZ<T>,
    truth: &LowRankInstance<T>,
    obs: &ObservationSet<T>,
    params: &ModelParams<T>,
) -> Result<RcDiagnostic<T>> {
    let z_star = truth.z_star();
    let align = procrustes_align(z.matrix(), z_star.matrix())?;
    let z_bar = z_star.rotate(&align.rotation)?;
    let h = z.sub(&z_bar)?;
    let grad = gradient(z, obs, params)?;

    let r = T::from_usize_lossy(truth.rank());
    let alpha = T::lit(RC_ALPHA);
    let beta = T::lit(RC_BETA_FACTOR) * truth.mu() * truth.mu() * r * r * truth.kappa();
    let lhs = grad.inner(&h)?;
    let curvature_term = truth.sigma_min() * h.frobenius_norm().powi(2) / alpha;
    let gradient_term = grad.frobenius_norm().powi(2) / (beta * truth.sigma_max());
    Ok(RcDiagnostic {
        lhs,
        curvature_term,
        gradient_term,
        alpha,
        beta,
        distance: align.distance,
        satisfied: lhs >= curvature_term + gradient_term,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    #[test]
    fn clipping_rescales_only_long_rows() {
        let m = DenseMatrix::from_row_major(3, 2, vec![3.0, 4.0, 0.3, 0.4, 0.0, 0.0]).unwrap();
        let z = FactorZ::from_matrix(2, 1, m).unwrap();
        let p = project_c(&z, 2.5);
        assert_eq!(p.matrix().row(0), &[1.5, 2.0]);
        assert_eq!(p.matrix().row(1), &[0.3, 0.4]);
        assert_eq!(p.matrix().row(2), &[0.0, 0.0]);
        assert_eq!(project_c(&p, 2.5), p);
    }

    #[test]
    fn mu_of_canonical_and_identity_factors() {
        let n = 6;
        let r = 2;
        let e = DenseMatrix::from_fn(n, r, |i, j| if i == j { 1.0 } else { 0.0 });
        let svd = SvdResult::new(e.clone(), vec![1.0, 1.0], e).unwrap();
        assert_eq!(incoherence_mu(&svd, n, n).unwrap(), n as f64 / r as f64);

        let id = DenseMatrix::<f64>::identity(4);
        let svd = SvdResult::new(id.clone(), vec![1.0; 4], id).unwrap();
        assert_eq!(incoherence_mu(&svd, 4, 4).unwrap(), 1.0);
    }

    #[test]
    fn mu_rejects_bad_input() {
        let id = DenseMatrix::<f64>::identity(3);
        let svd = SvdResult::from_parts_unchecked(id.scale(1.1), vec![1.0; 3], id.clone());
        assert!(incoherence_mu(&svd, 3, 3).is_err());
        let svd = SvdResult::new(id.clone(), vec![1.0; 3], id).unwrap();
        assert!(incoherence_mu(&svd, 4, 3).is_err());
    }
}
