//! Reference solvers for comparison: singular value projection (SVP) and
//! alternating minimization (AltMin).

mod altmin;
mod svp;

pub use altmin::{altmin_solve, AltMinState, RIDGE};
pub use svp::svp_solve;

use crate::error::{invalid, Result};
use crate::linalg::{DEFAULT_OVERSAMPLE, DEFAULT_POWER_ITERS};
use crate::observation::ObservationSet;
use crate::scalar::Scalar;
use crate::solver::{DEFAULT_MAX_ITERS, DEFAULT_TOL_REL_OBS};

/// SVP step, applied to the `p⁻¹`-rescaled residual.
pub const DEFAULT_SVP_STEP: f64 = 0.25;

#[derive(Clone, Debug, PartialEq)]
pub struct BaselineConfig<T> {
    pub rank: usize,
    /// SVP step size; ignored by AltMin.
    pub step: T,
    pub max_iters: usize,
    pub tol_rel_obs: T,
    pub seed: u64,
    pub oversample: usize,
    pub power_iters: usize,
}

impl<T: Scalar> BaselineConfig<T> {
    pub fn new(rank: usize) -> Self {
        Self {
            rank,
            step: T::lit(DEFAULT_SVP_STEP),
            max_iters: DEFAULT_MAX_ITERS,
            tol_rel_obs: T::lit(DEFAULT_TOL_REL_OBS),
            seed: 0,
            oversample: DEFAULT_OVERSAMPLE,
            power_iters: DEFAULT_POWER_ITERS,
        }
    }

    pub(crate) fn validate(&self, obs: &ObservationSet<T>) -> Result<()> {
        if self.rank == 0 || self.rank > obs.n1().min(obs.n2()) {
            return Err(invalid!(
                "rank {} invalid for a {}x{} problem",
                self.rank,
                obs.n1(),
                obs.n2()
            ));
        }
        if !(self.step > T::zero()) || !self.step.is_finite() {
            return Err(invalid!("step must be positive"));
        }
        if self.max_iters == 0 {
            return Err(invalid!("max_iters must be at least 1"));
        }
        if !(self.tol_rel_obs > T::zero()) {
            return Err(invalid!("tol_rel_obs must be positive"));
        }
        Ok(())
    }
}
