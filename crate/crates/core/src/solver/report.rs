use std::fmt;
use std::time::Instant;

use crate::error::Result;
use crate::instance::LowRankInstance;
use crate::linalg::{factored_difference_norm, DenseMatrix};
use crate::model::{distance, FactorZ};
use crate::scalar::Scalar;

/// Iterations recorded one by one; past this only every 10th is kept.
pub const TRACE_DENSE_LIMIT: usize = 10_000;
/// Abort once the objective exceeds this multiple of its initial value.
pub const DIVERGENCE_FACTOR: f64 = 1e3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Gd,
    Svp,
    AltMin,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Gd => "gd",
            SolverKind::Svp => "svp",
            SolverKind::AltMin => "altmin",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gd" => Ok(SolverKind::Gd),
            "svp" => Ok(SolverKind::Svp),
            "altmin" => Ok(SolverKind::AltMin),
            other => Err(format!("unknown solver `{other}` (expected gd, svp or altmin)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Converged,
    MaxIters,
    Diverged,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::MaxIters => "max-iters",
            Status::Diverged => "diverged",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord<T> {
    pub iter: usize,
    pub objective: T,
    /// `‖P_Ω(X̂ − X⋆)‖_F / ‖P_Ω(X⋆)‖_F`.
    pub rel_obs_residual: T,
    /// `d(Z^k, Z⋆)` when the truth is known and the solver has a lifted factor.
    pub distance: Option<T>,
    /// `‖X̂ − X⋆‖_F / ‖X⋆‖_F` when the truth is known.
    pub rel_error: Option<T>,
    /// Wall-clock seconds since the solve started.
    pub seconds: f64,
}

/// Outcome of one solver run. All three solvers share this schema.
#[derive(Clone, Debug)]
pub struct SolveReport<T> {
    pub solver: SolverKind,
    pub status: Status,
    pub iterations: usize,
    pub trace: Vec<TraceRecord<T>>,
    /// `X̂ = left · rightᵀ`.
    pub left: DenseMatrix<T>,
    pub right: DenseMatrix<T>,
    /// Final lifted factor (gradient descent only).
    pub z: Option<FactorZ<T>>,
    /// Mean counted multiply-adds per iteration.
    pub flops_per_iter: f64,
    /// Least-squares solves that needed a ridge term (AltMin only).
    pub regularized_solves: usize,
    pub seconds: f64,
}

impl<T: Scalar> SolveReport<T> {
    pub fn estimate(&self) -> DenseMatrix<T> {
        self.left
            .matmul_t(&self.right)
            .expect("estimate factors share their column count")
    }

    pub fn last(&self) -> &TraceRecord<T> {
        self.trace.last().expect("trace always holds the initial point")
    }

    /// `‖X̂ − X⋆‖_F / ‖X⋆‖_F`, computed from the factors.
    pub fn relative_error(&self, truth: &LowRankInstance<T>) -> Result<T> {
        relative_error(&self.left, &self.right, truth)
    }
}

pub(crate) fn relative_error<T: Scalar>(
    left: &DenseMatrix<T>,
    right: &DenseMatrix<T>,
    truth: &LowRankInstance<T>,
) -> Result<T> {
    let us = truth.u_star().scale_columns(truth.sigma_star());
    let diff = crate::flops::measure(|| factored_difference_norm(left, right, &us, truth.v_star())).0?;
    Ok(diff / truth.frobenius_norm())
}

/// Truth-dependent trace columns. Work done here is excluded from the flop
/// tally of the solver.
pub(crate) fn truth_metrics<T: Scalar>(
    truth: Option<&LowRankInstance<T>>,
    z_star: Option<&FactorZ<T>>,
    left: &DenseMatrix<T>,
    right: &DenseMatrix<T>,
    lifted: Option<&FactorZ<T>>,
) -> Result<(Option<T>, Option<T>)> {
    let Some(truth) = truth else {
        return Ok((None, None));
    };
    let rel = relative_error(left, right, truth)?;
    let dist = match (lifted, z_star) {
        (Some(z), Some(zs)) => Some(crate::flops::measure(|| distance(z, zs)).0?),
        _ => None,
    };
    Ok((dist, Some(rel)))
}

/// Shared trace bookkeeping and stopping logic.
pub(crate) struct Tracker<T> {
    start: Instant,
    trace: Vec<TraceRecord<T>>,
    initial_objective: Option<T>,
    objective_floor: T,
    tol: T,
    pending: Option<TraceRecord<T>>,
}

impl<T: Scalar> Tracker<T> {
    pub fn new(tol: T, objective_floor: T) -> Self {
        Self {
            start: Instant::now(),
            trace: Vec::new(),
            initial_objective: None,
            objective_floor,
            tol,
            pending: None,
        }
    }

    pub fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    /// Records iterate `iter` and reports whether the run should stop.
    pub fn record(
        &mut self,
        iter: usize,
        objective: T,
        rel_obs_residual: T,
        distance: Option<T>,
        rel_error: Option<T>,
    ) -> Option<Status> {
        let rec = TraceRecord {
            iter,
            objective,
            rel_obs_residual,
            distance,
            rel_error,
            seconds: self.elapsed(),
        };
        if iter <= TRACE_DENSE_LIMIT || iter.is_multiple_of(10) {
            self.trace.push(rec);
            self.pending = None;
        } else {
            self.pending = Some(rec);
        }

        if !objective.is_finite() || !rel_obs_residual.is_finite() {
            return Some(Status::Diverged);
        }
        let init = *self.initial_objective.get_or_insert(objective);
        if objective > T::lit(DIVERGENCE_FACTOR) * init && objective > self.objective_floor {
            return Some(Status::Diverged);
        }
        if rel_obs_residual <= self.tol {
            return Some(Status::Converged);
        }
        None
    }

    pub fn finish(mut self) -> (Vec<TraceRecord<T>>, f64) {
        if let Some(rec) = self.pending.take() {
            self.trace.push(rec);
        }
        let secs = self.elapsed();
        (self.trace, secs)
    }
}

/// `‖P_Ω r‖ / ‖P_Ω X⋆‖`, falling back to the absolute residual when every
/// observation is zero.
pub(crate) fn relative_residual<T: Scalar>(residual_norm: T, values_norm: T) -> T {
    if values_norm > T::zero() {
        residual_norm / values_norm
    } else {
        residual_norm
    }
}
