//! Coordinate-descent phase retrieval.
//!
//! Recovers a complex signal `x` from intensity measurements
//! `b_m = |a_m^H x|^2` by minimizing the quartic least-squares objective
//! `f(x) = sum_m (|a_m^H x|^2 - b_m)^2` one real coordinate at a time.
//! Each coordinate subproblem is a univariate quartic whose exact minimizer
//! comes from the closed-form roots of a cubic, so every update is O(M).
//!
//! The crate provides cyclic/randomized/greedy coordinate descent, an
//! l1-regularized variant for sparse signals (fourth-order soft-thresholding),
//! a Wirtinger-flow gradient baseline, spectral initialization, and a
//! constant-modulus blind-equalization front end that reuses the same solvers.
//!
//! The `parallel` feature (on by default) runs Monte-Carlo trials on a rayon
//! pool; without it the same experiment code runs sequentially.

pub mod cd;
pub mod embedding;
pub mod ensemble;
pub mod equalizer;
mod error;
pub mod experiment;
pub mod measurement;
pub mod metrics;
pub mod rng;
pub mod scalar_min;
pub mod sparse;
pub mod spectral;
pub mod state;
pub mod wf;

pub use error::{Error, Result};

pub use cd::{run as cd_run, CdSolver, SolverConfig, Variant};
pub use embedding::{embed, unembed};
pub use ensemble::{gradient, objective, Complex, MeasurementEnsemble};
pub use metrics::{dist_to_orbit, relative_recovery_error, RunTrace, TraceRecord, SUCCESS_THRESHOLD};
pub use scalar_min::{
    coordinate_coeffs, fost, minimize_quartic, minimize_quartic_interval, solve_cubic, CubicRoots,
    QuarticCoeffs,
};
pub use sparse::{l1_objective, l1_run, L1Config, L1Variant};
pub use spectral::{spectral_init, SpectralConfig};
pub use state::SolverState;
pub use wf::{wf_run, WfConfig, WfPolicy};
