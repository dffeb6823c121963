//! Projected gradient descent on the lifted factor: spectral initialization,
//! the clipped gradient step, and the driver loop with its stopping rules.

mod report;

pub use report::{
    SolveReport, SolverKind, Status, TraceRecord, DIVERGENCE_FACTOR, TRACE_DENSE_LIMIT,
};
pub(crate) use report::{relative_residual, truth_metrics, Tracker};

use crate::error::{invalid, Result};
use crate::flops;
use crate::instance::LowRankInstance;
use crate::linalg::{
    randomized_rank_r_svd, spectral_norm, SvdResult, DEFAULT_OVERSAMPLE, DEFAULT_POWER_ITERS,
};
use crate::model::{
    clip_radius, evaluate, gradient, incoherence_mu, lift, project_c, project_c_in_place,
    FactorZ, ModelParams,
};
use crate::observation::ObservationSet;
use crate::scalar::{axpy, Scalar};

/// Default step-size constant, applied as `eta / ‖Z⁰‖²`.
pub const DEFAULT_ETA: f64 = 0.3;
pub const DEFAULT_LAMBDA: f64 = 0.5;
pub const DEFAULT_TOL_REL_OBS: f64 = 1e-6;
pub const DEFAULT_MAX_ITERS: usize = 5_000;

/// How the step-size constant is normalized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepSchedule {
    /// `eta / ‖Z⁰‖²`; needs nothing beyond the observations.
    InitNorm,
    /// `eta / σ⋆₁`; requires the ground truth.
    TrueSigma,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig<T> {
    pub rank: usize,
    pub eta: T,
    pub lambda: T,
    pub max_iters: usize,
    pub tol_rel_obs: T,
    pub use_projection: bool,
    pub seed: u64,
    /// Incoherence used for the clipping radius. Falls back to the truth's
    /// `μ`, then to the incoherence of the spectral initialization.
    pub mu_override: Option<T>,
    pub schedule: StepSchedule,
    pub oversample: usize,
    pub power_iters: usize,
}

impl<T: Scalar> SolverConfig<T> {
    pub fn new(rank: usize) -> Self {
        Self {
            rank,
            eta: T::lit(DEFAULT_ETA),
            lambda: T::lit(DEFAULT_LAMBDA),
            max_iters: DEFAULT_MAX_ITERS,
            tol_rel_obs: T::lit(DEFAULT_TOL_REL_OBS),
            use_projection: true,
            seed: 0,
            mu_override: None,
            schedule: StepSchedule::InitNorm,
            oversample: DEFAULT_OVERSAMPLE,
            power_iters: DEFAULT_POWER_ITERS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank == 0 {
            return Err(invalid!("rank must be at least 1"));
        }
        if !(self.eta > T::zero()) || !self.eta.is_finite() {
            return Err(invalid!("eta must be positive"));
        }
        if !(self.lambda >= T::zero()) {
            return Err(invalid!("lambda must be nonnegative"));
        }
        if self.max_iters == 0 {
            return Err(invalid!("max_iters must be at least 1"));
        }
        if !(self.tol_rel_obs > T::zero()) {
            return Err(invalid!("tol_rel_obs must be positive"));
        }
        if let Some(mu) = self.mu_override {
            if !(mu > T::zero()) {
                return Err(invalid!("mu override must be positive"));
            }
        }
        Ok(())
    }
}

/// Spectral starting point.
#[derive(Clone, Debug)]
pub struct SpectralInit<T> {
    /// Rank-`r` SVD of `p⁻¹P_Ω(X⋆)`.
    pub svd: SvdResult<T>,
    /// Lifted SVD factor.
    pub z0: FactorZ<T>,
    /// `Z⁰` clipped onto the feasible set.
    pub z1: FactorZ<T>,
    /// `‖Z⁰‖₂`.
    pub norm_z0: T,
    pub clip_radius: T,
    /// Incoherence used for the clipping radius.
    pub mu: T,
}

/// Builds `Z⁰` from the rank-`r` SVD of `p⁻¹P_Ω(X⋆)` and clips it to `Z¹`.
///
/// When `mu` is `None` the incoherence of the computed singular vectors is
/// used in the clipping radius.
pub fn spectral_init<T: Scalar>(
    obs: &ObservationSet<T>,
    r: usize,
    mu: Option<T>,
    seed: u64,
) -> Result<SpectralInit<T>> {
    spectral_init_with(obs, r, mu, seed, DEFAULT_OVERSAMPLE, DEFAULT_POWER_ITERS)
}

pub fn spectral_init_with<T: Scalar>(
    obs: &ObservationSet<T>,
    r: usize,
    mu: Option<T>,
    seed: u64,
    oversample: usize,
    power_iters: usize,
) -> Result<SpectralInit<T>> {
    let (n1, n2) = (obs.n1(), obs.n2());
    if r == 0 || r > n1.min(n2) {
        return Err(invalid!("rank {r} invalid for a {n1}x{n2} problem"));
    }
    let op = obs.scaled(T::one() / obs.p_hat());
    let svd = randomized_rank_r_svd(&op, r, oversample, power_iters, seed)?;
    let z0 = lift(&svd);
    let norm_z0 = spectral_norm(z0.matrix())?;
    let mu = match mu {
        Some(mu) => mu,
        None => incoherence_mu(&svd, n1, n2)?,
    };
    let radius = clip_radius(mu, r, n1, n2, norm_z0);
    let z1 = if radius > T::zero() {
        project_c(&z0, radius)
    } else {
        z0.clone()
    };
    Ok(SpectralInit {
        svd,
        z0,
        z1,
        norm_z0,
        clip_radius: radius,
        mu,
    })
}

/// `Z ← P_C(Z − step·∇f(Z))`, with the projection skipped when
/// `use_projection` is false.
pub fn gd_step<T: Scalar>(
    z: &FactorZ<T>,
    obs: &ObservationSet<T>,
    params: &ModelParams<T>,
    step: T,
    use_projection: bool,
) -> Result<FactorZ<T>> {
    let grad = gradient(z, obs, params)?;
    apply_step(z, &grad, params, step, use_projection)
}

fn apply_step<T: Scalar>(
    z: &FactorZ<T>,
    grad: &FactorZ<T>,
    params: &ModelParams<T>,
    step: T,
    use_projection: bool,
) -> Result<FactorZ<T>> {
    let mut next = z.clone();
    axpy(-step, grad.matrix().as_slice(), next.matrix_mut().as_mut_slice());
    flops::count(2 * grad.matrix().as_slice().len());
    if use_projection {
        project_c_in_place(&mut next, params.clip_radius);
    }
    Ok(next)
}

/// Runs spectral initialization followed by projected gradient descent.
///
/// Stops when the relative observed residual reaches `tol_rel_obs`, after
/// `max_iters` steps, or on divergence (non-finite values, or the objective
/// growing past `DIVERGENCE_FACTOR` times its initial value). When `truth` is
/// given the trace also carries `d(Z^k, Z⋆)` and the relative error.
pub fn solve<T: Scalar>(
    obs: &ObservationSet<T>,
    config: &SolverConfig<T>,
    truth: Option<&LowRankInstance<T>>,
) -> Result<SolveReport<T>> {
    config.validate()?;
    if let Some(t) = truth {
        if (t.n1(), t.n2()) != (obs.n1(), obs.n2()) {
            return Err(invalid!("ground truth and observations disagree on dimensions"));
        }
    }
    let mu = config.mu_override.or(truth.map(LowRankInstance::mu));
    let init = spectral_init_with(
        obs,
        config.rank,
        mu,
        config.seed,
        config.oversample,
        config.power_iters,
    )?;
    let step = match config.schedule {
        StepSchedule::InitNorm => config.eta / (init.norm_z0 * init.norm_z0),
        StepSchedule::TrueSigma => {
            let t = truth.ok_or_else(|| invalid!("the true-sigma step schedule needs the truth"))?;
            config.eta / t.sigma_max()
        }
    };
    if !(step > T::zero()) || !step.is_finite() {
        return Err(crate::Error::NumericalFailure(
            "spectral initialization is zero; step size undefined".into(),
        ));
    }
    let clip = if init.clip_radius > T::zero() {
        init.clip_radius
    } else {
        T::one()
    };
    let params = ModelParams::new(config.lambda, obs.p_hat(), clip)?;
    let z_star = truth.map(LowRankInstance::z_star);
    let values_norm = obs.values_norm();
    let floor = T::epsilon() * values_norm * values_norm / params.p;

    let mut z = if config.use_projection {
        init.z1
    } else {
        init.z0
    };
    let mut tracker = Tracker::new(config.tol_rel_obs, floor);
    let mut eval = evaluate(&z, obs, &params, true)?;
    let observe = |z: &FactorZ<T>| -> Result<(Option<T>, Option<T>)> {
        truth_metrics(truth, z_star.as_ref(), &z.top(), &z.bottom(), Some(z))
    };

    let (d, e) = observe(&z)?;
    let mut status = tracker.record(
        0,
        eval.objective(),
        relative_residual(eval.residual_norm, values_norm),
        d,
        e,
    );
    let mut iterations = 0;
    let mut flop_total = 0u64;
    while status.is_none() && iterations < config.max_iters {
        let (next, cost) = flops::measure(|| -> Result<_> {
            let grad = eval.gradient.as_ref().expect("gradient requested");
            let next = apply_step(&z, grad, &params, step, config.use_projection)?;
            let eval = evaluate(&next, obs, &params, true)?;
            Ok((next, eval))
        });
        let (next, next_eval) = next?;
        flop_total += cost;
        iterations += 1;
        z = next;
        eval = next_eval;
        let (d, e) = observe(&z)?;
        status = tracker.record(
            iterations,
            eval.objective(),
            relative_residual(eval.residual_norm, values_norm),
            d,
            e,
        );
    }
    let status = status.unwrap_or(Status::MaxIters);
    let (trace, seconds) = tracker.finish();
    Ok(SolveReport {
        solver: SolverKind::Gd,
        status,
        iterations,
        trace,
        left: z.top(),
        right: z.bottom(),
        z: Some(z),
        flops_per_iter: if iterations > 0 {
            flop_total as f64 / iterations as f64
        } else {
            0.0
        },
        regularized_solves: 0,
        seconds,
    })
}
