//! Experiment harness for lifted gradient-descent matrix completion:
//! synthetic instances, phase-transition, convergence and runtime studies,
//! and the file formats used by the `bmc` command-line tool.

// `!(x > 0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod budget;
pub mod config;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod io;

pub use config::{ExperimentKind, ExperimentSpec, SampleGrid, Sampling};
pub use error::{HarnessError, Result};
pub use experiments::{
    crossing, run, run_convergence, run_phase_transition, run_runtime, Outcome,
};
