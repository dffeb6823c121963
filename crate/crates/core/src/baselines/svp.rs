use super::BaselineConfig;
use crate::error::Result;
use crate::flops;
use crate::instance::LowRankInstance;
use crate::linalg::{randomized_rank_r_svd, DenseMatrix, LinearOperator, SvdResult};
use crate::model::lift;
use crate::observation::{ObservationSet, SparseResidual};
use crate::rng::derive_seed;
use crate::scalar::{dot, Scalar};
use crate::solver::{relative_residual, truth_metrics, SolveReport, SolverKind, Status, Tracker};

/// `U Σ Vᵀ − S`, with `S` supported on `Ω`; applied without densifying.
struct LowRankMinusSparse<'a, T> {
    low_rank: Option<&'a SvdResult<T>>,
    sparse: SparseResidual<'a, T>,
}

impl<T: Scalar> LinearOperator<T> for LowRankMinusSparse<'_, T> {
    fn nrows(&self) -> usize {
        self.sparse.observations().n1()
    }

    fn ncols(&self) -> usize {
        self.sparse.observations().n2()
    }

    fn apply(&self, x: &DenseMatrix<T>) -> DenseMatrix<T> {
        let mut out = self.sparse.apply(x).scale(-T::one());
        if let Some(svd) = self.low_rank {
            let vx = svd.v().t_matmul(x).expect("conforming block");
            let low = svd.u().matmul(&scale_rows(&vx, svd.sigma())).expect("conforming block");
            out = out.add(&low).expect("same shape");
        }
        out
    }

    fn apply_adjoint(&self, y: &DenseMatrix<T>) -> DenseMatrix<T> {
        let mut out = self.sparse.apply_adjoint(y).scale(-T::one());
        if let Some(svd) = self.low_rank {
            let uy = svd.u().t_matmul(y).expect("conforming block");
            let low = svd.v().matmul(&scale_rows(&uy, svd.sigma())).expect("conforming block");
            out = out.add(&low).expect("same shape");
        }
        out
    }
}

fn scale_rows<T: Scalar>(m: &DenseMatrix<T>, d: &[T]) -> DenseMatrix<T> {
    DenseMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)] * d[i])
}

/// Residual `⟨(UΣ)_i, V_j⟩ − X⋆_ij` on `Ω` for the current iterate.
fn residual_values<T: Scalar>(obs: &ObservationSet<T>, iterate: Option<&SvdResult<T>>) -> Vec<T> {
    match iterate {
        None => obs.values().iter().map(|&x| -x).collect(),
        Some(svd) => {
            let us = svd.u().scale_columns(svd.sigma());
            let out = obs
                .indices()
                .iter()
                .zip(obs.values())
                .map(|(&(i, j), &x)| dot(us.row(i), svd.v().row(j)) - x)
                .collect();
            flops::count(obs.len() * (svd.rank() + 1));
            out
        }
    }
}

/// Singular value projection: `X ← P_r(X − step·p⁻¹P_Ω(X − X⋆))`.
///
/// The iterate is held as a rank-`r` SVD, so the update operator is a
/// factored low-rank term minus a sparse term, applied matrix-free inside
/// the randomized SVD. Starts from `X = 0`.
pub fn svp_solve<T: Scalar>(
    obs: &ObservationSet<T>,
    config: &BaselineConfig<T>,
    truth: Option<&LowRankInstance<T>>,
) -> Result<SolveReport<T>> {
    config.validate(obs)?;
    let r = config.rank;
    let p = obs.p_hat();
    let inv_p = T::one() / p;
    let coef = config.step * inv_p;
    let values_norm = obs.values_norm();
    let floor = T::epsilon() * values_norm * values_norm * inv_p;
    let z_star = truth.map(LowRankInstance::z_star);

    let mut iterate: Option<SvdResult<T>> = None;
    let mut resid = residual_values(obs, None);
    let data_objective = |res: &[T]| inv_p * res.iter().map(|&v| v * v).sum::<T>();
    let residual_norm = |res: &[T]| res.iter().map(|&v| v * v).sum::<T>().sqrt();

    let mut tracker = Tracker::new(config.tol_rel_obs, floor);
    let zeros = (DenseMatrix::zeros(obs.n1(), r), DenseMatrix::zeros(obs.n2(), r));
    let (d, e) = truth_metrics(truth, z_star.as_ref(), &zeros.0, &zeros.1, None)?;
    let mut status = tracker.record(
        0,
        data_objective(&resid),
        relative_residual(residual_norm(&resid), values_norm),
        d,
        e,
    );

    let mut iterations = 0;
    let mut flop_total = 0u64;
    while status.is_none() && iterations < config.max_iters {
        let (next, cost) = flops::measure(|| -> Result<_> {
            let scaled: Vec<T> = resid.iter().map(|&v| coef * v).collect();
            flops::count(scaled.len());
            let op = LowRankMinusSparse {
                low_rank: iterate.as_ref(),
                sparse: SparseResidual::new(obs, scaled),
            };
            let seed = derive_seed(config.seed, &[iterations as u64]);
            let svd = randomized_rank_r_svd(&op, r, config.oversample, config.power_iters, seed)?;
            let resid = residual_values(obs, Some(&svd));
            Ok((svd, resid))
        });
        let (svd, next_resid) = next?;
        flop_total += cost;
        iterations += 1;
        resid = next_resid;
        let z = lift(&svd);
        let (d, e) = truth_metrics(truth, z_star.as_ref(), &z.top(), &z.bottom(), Some(&z))?;
        iterate = Some(svd);
        status = tracker.record(
            iterations,
            data_objective(&resid),
            relative_residual(residual_norm(&resid), values_norm),
            d,
            e,
        );
    }

    let status = status.unwrap_or(Status::MaxIters);
    let (trace, seconds) = tracker.finish();
    let (left, right) = match &iterate {
        Some(svd) => {
            let z = lift(svd);
            (z.top(), z.bottom())
        }
        None => zeros,
    };
    Ok(SolveReport {
        solver: SolverKind::Svp,
        status,
        iterations,
        trace,
        left,
        right,
        z: None,
        flops_per_iter: if iterations > 0 {
            flop_total as f64 / iterations as f64
        } else {
            0.0
        },
        regularized_solves: 0,
        seconds,
    })
}
