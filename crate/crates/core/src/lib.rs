//! Low-rank matrix completion by projected gradient descent on a lifted
//! Burer-Monteiro factorization.
//!
//! A rank-`r` matrix `X⋆ ∈ ℝ^{n1×n2}` is lifted to the positive semidefinite
//! matrix `Z⋆Z⋆ᵀ` with `Z⋆ = [U⋆; V⋆]Σ⋆^{1/2}`. The solver initializes from
//! the rank-`r` SVD of the rescaled observations, then runs gradient descent
//! on the factor `Z` with row-wise clipping onto an incoherence ball.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`.

// `!(x > 0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod flops;
pub mod instance;
pub mod linalg;
pub mod model;
pub mod observation;
pub mod rng;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix = linalg::DenseMatrix<f64>;
pub type Svd = linalg::SvdResult<f64>;
pub type Observations = observation::ObservationSet<f64>;
pub type Factor = model::FactorZ<f64>;
pub type Instance = instance::LowRankInstance<f64>;
pub type Report = solver::SolveReport<f64>;

pub type Matrix32 = linalg::DenseMatrix<f32>;
pub type Observations32 = observation::ObservationSet<f32>;
pub type Factor32 = model::FactorZ<f32>;
