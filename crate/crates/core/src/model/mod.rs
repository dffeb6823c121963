//! The lifted factor representation and everything evaluated on it:
//! objective, gradient, feasible-set projection, incoherence, distance to
//! the solution set and the regularity diagnostic.

mod factor;
mod geometry;
mod loss;

pub use factor::{lift, FactorZ};
pub use geometry::{
    distance, incoherence_mu, project_c, project_c_in_place, rc_diagnostic, RcDiagnostic,
    RC_ALPHA, RC_BETA_FACTOR,
};
pub use loss::{balance_gram, clip_radius, evaluate, gradient, objective, Evaluation, ModelParams};
