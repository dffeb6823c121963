//! The regularized lifted loss and its gradient.
//!
//! With `r_ij = ⟨Z_U(i), Z_V(j)⟩ − X⋆_ij` and `G = Z_UᵀZ_U − Z_VᵀZ_V`,
//!
//! ```text
//! f(Z) = (1/2p)‖P_Ω̲(ZZᵀ − Y⋆)‖²_F + (λ/4)‖ZᵀDZ‖²_F
//!      = (1/p) Σ_Ω r_ij²             + (λ/4)‖G‖²_F
//! ```
//!
//! where the lifted mask `Ω̲` covers both off-diagonal blocks, so every
//! rectangular observation is counted twice. The gradient is
//!
//! ```text
//! ∇f(Z) = 2·[0 M; Mᵀ 0]·Z + λ·[Z_U G; −Z_V G],    M = p⁻¹ P_Ω(Z_U Z_Vᵀ − X⋆)
//! ```
//!
//! Neither `D`, `ZZᵀ` nor any `(n1+n2)²` matrix is ever formed.

use super::FactorZ;
use crate::error::{invalid, Result};
use crate::flops;
use crate::linalg::DenseMatrix;
use crate::observation::ObservationSet;
use crate::scalar::{axpy, dot, Scalar};

/// Regularization weight, sampling rate and clipping radius of the model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams<T> {
    pub lambda: T,
    pub p: T,
    pub clip_radius: T,
}

impl<T: Scalar> ModelParams<T> {
    pub fn new(lambda: T, p: T, clip_radius: T) -> Result<Self> {
        if !(lambda >= T::zero()) || !lambda.is_finite() {
            return Err(invalid!("lambda must be finite and >= 0"));
        }
        if !(p > T::zero() && p <= T::one()) {
            return Err(invalid!("p must lie in (0, 1]"));
        }
        if !(clip_radius > T::zero()) {
            return Err(invalid!("clip radius must be positive"));
        }
        Ok(Self {
            lambda,
            p,
            clip_radius,
        })
    }
}

/// Clipping radius `θ = √(2μr / (n1 ∧ n2)) · ‖Z⁰‖`.
pub fn clip_radius<T: Scalar>(mu: T, r: usize, n1: usize, n2: usize, norm_z0: T) -> T {
    let n = T::from_usize_lossy(n1.min(n2));
    (T::lit(2.0) * mu * T::from_usize_lossy(r) / n).sqrt() * norm_z0
}

/// Objective value split into its two terms.
#[derive(Clone, Debug)]
pub struct Evaluation<T> {
    /// `(1/p) Σ_Ω r_ij²`.
    pub data_term: T,
    /// `(λ/4)‖G‖²_F`.
    pub reg_term: T,
    /// `‖P_Ω(Z_U Z_Vᵀ − X⋆)‖_F`.
    pub residual_norm: T,
    pub gradient: Option<FactorZ<T>>,
}

impl<T: Scalar> Evaluation<T> {
    pub fn objective(&self) -> T {
        self.data_term + self.reg_term
    }
}

fn check_dims<T: Scalar>(z: &FactorZ<T>, obs: &ObservationSet<T>) -> Result<()> {
    if z.n1() != obs.n1() || z.n2() != obs.n2() {
        return Err(invalid!(
            "factor blocks {}+{} do not match a {}x{} observation set",
            z.n1(),
            z.n2(),
            obs.n1(),
            obs.n2()
        ));
    }
    Ok(())
}

/// `G = Z_UᵀZ_U − Z_VᵀZ_V`.
pub fn balance_gram<T: Scalar>(z: &FactorZ<T>) -> DenseMatrix<T> {
    let r = z.rank();
    let mut g = DenseMatrix::zeros(r, r);
    for i in 0..z.n1() {
        let row = z.u_row(i);
        for (a, &ra) in row.iter().enumerate() {
            axpy(ra, row, g.row_mut(a));
        }
    }
    for j in 0..z.n2() {
        let row = z.v_row(j);
        for (a, &ra) in row.iter().enumerate() {
            axpy(-ra, row, g.row_mut(a));
        }
    }
    flops::count((z.n1() + z.n2()) * r * r);
    g
}

/// Evaluates the objective and, when `with_gradient`, its gradient, sharing
/// the residual pass between them.
pub fn evaluate<T: Scalar>(
    z: &FactorZ<T>,
    obs: &ObservationSet<T>,
    params: &ModelParams<T>,
    with_gradient: bool,
) -> Result<Evaluation<T>> {
    check_dims(z, obs)?;
    let r = z.rank();
    let inv_p = T::one() / params.p;
    let two_inv_p = T::lit(2.0) * inv_p;

    let mut grad = with_gradient.then(|| FactorZ::zeros(z.n1(), z.n2(), r));
    let mut resid_sq = T::zero();
    for (&(i, j), &x) in obs.indices().iter().zip(obs.values()) {
        let res = dot(z.u_row(i), z.v_row(j)) - x;
        resid_sq += res * res;
        if let Some(g) = grad.as_mut() {
            let c = two_inv_p * res;
            axpy(c, z.v_row(j), g.u_row_mut(i));
            axpy(c, z.u_row(i), g.v_row_mut(j));
        }
    }
    flops::count(obs.len() * (r + 1));
    if grad.is_some() {
        flops::count(obs.len() * (2 * r + 1));
    }

    let gram = balance_gram(z);
    let reg_term = params.lambda / T::lit(4.0) * gram.frobenius_norm_sq();

    if let Some(g) = grad.as_mut() {
        if params.lambda != T::zero() {
            let lam = params.lambda;
            let mut tmp = vec![T::zero(); r];
            for i in 0..z.n1() {
                row_times(z.u_row(i), &gram, &mut tmp);
                axpy(lam, &tmp, g.u_row_mut(i));
            }
            for j in 0..z.n2() {
                row_times(z.v_row(j), &gram, &mut tmp);
                axpy(-lam, &tmp, g.v_row_mut(j));
            }
            flops::count((z.n1() + z.n2()) * r * r);
        }
    }

    Ok(Evaluation {
        data_term: inv_p * resid_sq,
        reg_term,
        residual_norm: resid_sq.sqrt(),
        gradient: grad,
    })
}

/// `out = row · G` for a symmetric `G`.
#[inline]
fn row_times<T: Scalar>(row: &[T], g: &DenseMatrix<T>, out: &mut [T]) {
    out.iter_mut().for_each(|o| *o = T::zero());
    for (a, &ra) in row.iter().enumerate() {
        axpy(ra, g.row(a), out);
    }
}

/// `f(Z)`.
pub fn objective<T: Scalar>(
    z: &FactorZ<T>,
    obs: &ObservationSet<T>,
    params: &ModelParams<T>,
) -> Result<T> {
    Ok(evaluate(z, obs, params, false)?.objective())
}

/// `∇f(Z)`, in `O(m·r + (n1+n2)·r²)`.
pub fn gradient<T: Scalar>(
    z: &FactorZ<T>,
    obs: &ObservationSet<T>,
    params: &ModelParams<T>,
) -> Result<FactorZ<T>> {
    Ok(evaluate(z, obs, params, true)?
        .gradient
        .expect("gradient requested"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_z(a: f64, b: f64) -> FactorZ<f64> {
        FactorZ::from_blocks(
            DenseMatrix::from_row_major(1, 1, vec![a]).unwrap(),
            DenseMatrix::from_row_major(1, 1, vec![b]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn scalar_gradient_by_hand() {
        let (a, b, x) = (1.5, -0.7, 0.4);
        let obs = ObservationSet::new(1, 1, vec![(0, 0, x)]).unwrap();
        let params = ModelParams::new(0.0, 1.0, 1.0).unwrap();
        let g = gradient(&scalar_z(a, b), &obs, &params).unwrap();
        let res = a * b - x;
        // Both off-diagonal copies of the observation contribute.
        assert!((g.u_row(0)[0] - 2.0 * res * b).abs() < 1e-15);
        assert!((g.v_row(0)[0] - 2.0 * res * a).abs() < 1e-15);
        let f = objective(&scalar_z(a, b), &obs, &params).unwrap();
        assert!((f - res * res).abs() < 1e-15);
    }

    #[test]
    fn balance_penalty_by_hand() {
        // Z_U = [1 0], Z_V = [0 1]: ZᵀDZ = diag(1, −1), penalty (1/2)/4·2.
        let zu = DenseMatrix::from_row_major(1, 2, vec![1.0, 0.0]).unwrap();
        let zv = DenseMatrix::from_row_major(1, 2, vec![0.0, 1.0]).unwrap();
        let z = FactorZ::from_blocks(zu, zv).unwrap();
        let obs = ObservationSet::new(1, 1, vec![(0, 0, 0.0)]).unwrap();
        let params = ModelParams::new(0.5f64, 1.0, 1.0).unwrap();
        let e = evaluate(&z, &obs, &params, false).unwrap();
        assert_eq!(e.data_term, 0.0);
        assert!((e.reg_term - 0.25).abs() < 1e-15);
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(-1.0, 0.5, 1.0).is_err());
        assert!(ModelParams::new(0.5, 0.0, 1.0).is_err());
        assert!(ModelParams::new(0.5, 1.1, 1.0).is_err());
        assert!(ModelParams::new(0.5, 0.5, 0.0).is_err());
    }

    #[test]
    fn clip_radius_formula() {
        let t = clip_radius(2.0f64, 3, 10, 12, 4.0);
        assert!((t - (2.0 * 2.0 * 3.0 / 10.0f64).sqrt() * 4.0).abs() < 1e-15);
    }
}
