use super::BaselineConfig;
use crate::error::Result;
use crate::flops;
use crate::instance::LowRankInstance;
use crate::linalg::{cholesky_solve, DenseMatrix};
use crate::observation::ObservationSet;
use crate::scalar::{axpy, dot, Scalar};
use crate::solver::{
    relative_residual, spectral_init_with, truth_metrics, SolveReport, SolverKind, Status, Tracker,
};

/// Relative ridge added to a singular normal-equation matrix.
pub const RIDGE: f64 = 1e-10;

/// Alternating least-squares state `X = U Vᵀ` over a fixed sample set.
#[derive(Clone, Debug)]
pub struct AltMinState<T> {
    pub u: DenseMatrix<T>,
    pub v: DenseMatrix<T>,
    /// Solves that needed the ridge fallback so far.
    pub regularized_solves: usize,
}

impl<T: Scalar> AltMinState<T> {
    pub fn new(u: DenseMatrix<T>, v: DenseMatrix<T>) -> Self {
        Self {
            u,
            v,
            regularized_solves: 0,
        }
    }

    /// `Σ_Ω (⟨U_i, V_j⟩ − X⋆_ij)²`.
    pub fn residual_sq(&self, obs: &ObservationSet<T>) -> T {
        obs.indices()
            .iter()
            .zip(obs.values())
            .map(|(&(i, j), &x)| {
                let d = dot(self.u.row(i), self.v.row(j)) - x;
                d * d
            })
            .sum()
    }

    /// Exact minimization over `U` with `V` fixed, one `r × r` solve per row.
    pub fn update_u(&mut self, obs: &ObservationSet<T>) {
        let r = self.u.cols();
        for i in 0..obs.n1() {
            let range = obs.row_range(i);
            let rows = range.clone().map(|k| (obs.indices()[k].1, obs.values()[k]));
            let sol = solve_row(&self.v, rows, range.len(), r, &mut self.regularized_solves);
            self.u.row_mut(i).copy_from_slice(&sol);
        }
    }

    /// Exact minimization over `V` with `U` fixed.
    pub fn update_v(&mut self, obs: &ObservationSet<T>) {
        let r = self.v.cols();
        for j in 0..obs.n2() {
            let positions = obs.col_positions(j);
            let cols = positions
                .iter()
                .map(|&k| (obs.indices()[k].0, obs.values()[k]));
            let sol = solve_row(&self.u, cols, positions.len(), r, &mut self.regularized_solves);
            self.v.row_mut(j).copy_from_slice(&sol);
        }
    }
}

/// Solves `(Σ f_k f_kᵀ) x = Σ y_k f_k` over the other factor's rows `f_k`.
fn solve_row<T: Scalar>(
    other: &DenseMatrix<T>,
    entries: impl Iterator<Item = (usize, T)>,
    count: usize,
    r: usize,
    regularized: &mut usize,
) -> Vec<T> {
    let mut gram = DenseMatrix::zeros(r, r);
    let mut rhs = vec![T::zero(); r];
    for (k, y) in entries {
        let f = other.row(k);
        for (a, &fa) in f.iter().enumerate() {
            axpy(fa, f, gram.row_mut(a));
        }
        axpy(y, f, &mut rhs);
    }
    flops::count(count * (r * r + r));
    if count >= r {
        if let Some(x) = cholesky_solve(&gram, &rhs) {
            return x;
        }
    }
    *regularized += 1;
    let trace: T = (0..r).map(|a| gram[(a, a)]).sum();
    let ridge = T::lit(RIDGE) * if trace > T::zero() { trace } else { T::one() };
    for a in 0..r {
        gram[(a, a)] += ridge;
    }
    cholesky_solve(&gram, &rhs).unwrap_or_else(|| vec![T::zero(); r])
}

/// Alternating minimization on a fixed sample set, started from the
/// spectral factors `(U⁰Σ⁰^{1/2}, V⁰Σ⁰^{1/2})`. One iteration is a full
/// sweep (`U` then `V`).
pub fn altmin_solve<T: Scalar>(
    obs: &ObservationSet<T>,
    config: &BaselineConfig<T>,
    truth: Option<&LowRankInstance<T>>,
) -> Result<SolveReport<T>> {
    config.validate(obs)?;
    let init = spectral_init_with(
        obs,
        config.rank,
        Some(T::one()),
        config.seed,
        config.oversample,
        config.power_iters,
    )?;
    let mut state = AltMinState::new(init.z0.top(), init.z0.bottom());
    let inv_p = T::one() / obs.p_hat();
    let values_norm = obs.values_norm();
    let floor = T::epsilon() * values_norm * values_norm * inv_p;

    let mut tracker = Tracker::new(config.tol_rel_obs, floor);
    let resid_sq = state.residual_sq(obs);
    let (d, e) = truth_metrics(truth, None, &state.u, &state.v, None)?;
    let mut status = tracker.record(
        0,
        inv_p * resid_sq,
        relative_residual(resid_sq.sqrt(), values_norm),
        d,
        e,
    );

    let mut iterations = 0;
    let mut flop_total = 0u64;
    while status.is_none() && iterations < config.max_iters {
        let (resid_sq, cost) = flops::measure(|| {
            state.update_u(obs);
            state.update_v(obs);
            let rs = state.residual_sq(obs);
            flops::count(obs.len() * (config.rank + 1));
            rs
        });
        flop_total += cost;
        iterations += 1;
        let (d, e) = truth_metrics(truth, None, &state.u, &state.v, None)?;
        status = tracker.record(
            iterations,
            inv_p * resid_sq,
            relative_residual(resid_sq.sqrt(), values_norm),
            d,
            e,
        );
    }

    let status = status.unwrap_or(Status::MaxIters);
    let (trace, seconds) = tracker.finish();
    Ok(SolveReport {
        solver: SolverKind::AltMin,
        status,
        iterations,
        trace,
        left: state.u,
        right: state.v,
        z: None,
        flops_per_iter: if iterations > 0 {
            flop_total as f64 / iterations as f64
        } else {
            0.0
        },
        regularized_solves: state.regularized_solves,
        seconds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one_closed_form() {
        // One observation per row and column: u_i = x_ij v_j / v_j².
        let obs = ObservationSet::new(2, 2, vec![(0, 1, 6.0f64), (1, 0, -2.0)]).unwrap();
        let u = DenseMatrix::from_row_major(2, 1, vec![1.0, 1.0]).unwrap();
        let v = DenseMatrix::from_row_major(2, 1, vec![0.5, 3.0]).unwrap();
        let mut s = AltMinState::new(u, v);
        s.update_u(&obs);
        assert!((s.u[(0, 0)] - 6.0 * 3.0 / 9.0).abs() < 1e-15);
        assert!((s.u[(1, 0)] - (-2.0 * 0.5) / 0.25).abs() < 1e-15);
        assert_eq!(s.regularized_solves, 0);
    }

    #[test]
    fn under_observed_rows_are_flagged() {
        let obs = ObservationSet::new(2, 3, vec![(0, 0, 1.0), (1, 1, 1.0), (1, 2, 2.0)]).unwrap();
        let u = DenseMatrix::from_fn(2, 2, |i, j| (i + j) as f64 + 1.0);
        let v = DenseMatrix::from_fn(3, 2, |i, j| (i * 2 + j) as f64 + 0.5);
        let mut s = AltMinState::new(u, v);
        s.update_u(&obs);
        assert_eq!(s.regularized_solves, 1);
        assert!(s.u.is_finite());
    }
}
