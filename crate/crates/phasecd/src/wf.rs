//! Wirtinger-flow baseline: full-gradient descent with either a fixed
//! stepsize or an exact line search along the negative gradient.
//!
//! The line search reuses the quartic machinery: f(xbar + alpha d) is a
//! quartic in alpha for any fixed direction d, so the optimal stepsize has
//! the same closed form as a coordinate step.

use crate::embedding::unembed;
use crate::ensemble::{gradient_from_products, Complex, MeasurementEnsemble};
use crate::metrics::{relative_recovery_error, RunTrace, TraceRecord};
use crate::scalar_min::{minimize_quartic, QuarticCoeffs};
use crate::state::SolverState;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Consecutive objective increases before a fixed-step run is aborted.
const DIVERGENCE_PATIENCE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WfPolicy {
    /// x <- x - mu * grad f(x).
    Fixed { mu: f64 },
    /// Exact minimization of f along -grad f(x); never increases f.
    ExactLineSearch,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WfConfig {
    pub policy: WfPolicy,
    /// Termination threshold on per-iteration objective decrease.
    /// `None` uses 1e-10 * max(1, f(x0)).
    pub tol: Option<f64>,
    pub max_iters: usize,
    pub trace_every: usize,
}

impl Default for WfConfig {
    fn default() -> Self {
        Self {
            policy: WfPolicy::ExactLineSearch,
            tol: None,
            max_iters: 1000,
            trace_every: 1,
        }
    }
}

/// Default fixed stepsize heuristic: mu = 0.1 / ||x0||^2.
pub fn default_fixed_mu(x0: &[Complex]) -> f64 {
    let norm_sq: f64 = x0.iter().map(|v| v.norm_sqr()).sum();
    0.1 / norm_sq.max(f64::MIN_POSITIVE)
}

/// One gradient iteration under the given policy. Returns the new objective.
pub fn wf_step(
    ensemble: &MeasurementEnsemble,
    state: &mut SolverState,
    policy: WfPolicy,
) -> Result<f64> {
    let n = ensemble.n();
    let g = gradient_from_products(ensemble, state.products());
    state.count_row_pass((ensemble.m() * n) as u64);

    // step direction in the embedding
    let sbar: Vec<f64> = match policy {
        WfPolicy::Fixed { mu } => g.iter().map(|v| -mu * v).collect(),
        WfPolicy::ExactLineSearch => g.iter().map(|v| -v).collect(),
    };
    let s = unembed(&sbar)?;
    // dz_m/dstep = a_m^H s
    let dz = ensemble.products(&s)?;
    state.count_row_pass((ensemble.m() * n) as u64);

    match policy {
        WfPolicy::Fixed { .. } => {
            let objective = state
                .products()
                .iter()
                .zip(&dz)
                .zip(ensemble.intensities())
                .map(|((zm, wm), bm)| {
                    let e = (zm + wm).norm_sqr() - bm;
                    e * e
                })
                .sum();
            state.translate(ensemble, &sbar, &dz, objective);
            Ok(objective)
        }
        WfPolicy::ExactLineSearch => {
            let mut coeffs = QuarticCoeffs::zero();
            for ((zm, wm), bm) in state
                .products()
                .iter()
                .zip(&dz)
                .zip(ensemble.intensities())
            {
                let c2 = wm.norm_sqr();
                let c1 = 2.0 * (zm.conj() * wm).re;
                let e = zm.norm_sqr() - bm;
                coeffs.accumulate(c2, c1, e);
            }
            // f(x + alpha*s) is bounded below (leading coefficient
            // sum_m |w_m|^4 >= 0); an Unbounded report can only be the
            // degeneracy classifier tripping on a vanishing gradient, so
            // treat it as "no progress possible" rather than an error.
            let (alpha, phi) = match minimize_quartic(&coeffs) {
                Ok(pair) => pair,
                Err(Error::Unbounded) => (0.0, state.objective()),
                Err(e) => return Err(e),
            };
            let (alpha, phi) = if phi > state.objective() {
                (0.0, state.objective())
            } else {
                (alpha, phi)
            };
            let step: Vec<f64> = sbar.iter().map(|v| alpha * v).collect();
            let dz_scaled: Vec<Complex> = dz.iter().map(|v| alpha * v).collect();
            state.translate(ensemble, &step, &dz_scaled, phi);
            Ok(phi)
        }
    }
}

pub struct WfSolver<'a> {
    ensemble: &'a MeasurementEnsemble,
    state: SolverState,
    config: WfConfig,
    iterations: u64,
    consecutive_increases: usize,
}

impl<'a> WfSolver<'a> {
    pub fn new(ensemble: &'a MeasurementEnsemble, x0: &[Complex], config: WfConfig) -> Result<Self> {
        if config.max_iters == 0 || config.trace_every == 0 {
            return Err(Error::InvalidConfig(
                "max_iters and trace_every must be >= 1".into(),
            ));
        }
        let state = SolverState::new(ensemble, x0)?;
        Ok(Self {
            ensemble,
            state,
            config,
            iterations: 0,
            consecutive_increases: 0,
        })
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn objective(&self) -> f64 {
        self.state.objective()
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    /// One iteration, with the fixed-step divergence guard.
    pub fn step(&mut self) -> Result<f64> {
        let before = self.state.objective();
        let after = wf_step(self.ensemble, &mut self.state, self.config.policy)?;
        self.iterations += 1;
        if !after.is_finite() {
            // overflow: diverged faster than the patience counter can tell
            return Err(Error::Diverged(self.consecutive_increases + 1));
        }
        if after > before {
            self.consecutive_increases += 1;
            if self.consecutive_increases >= DIVERGENCE_PATIENCE {
                return Err(Error::Diverged(DIVERGENCE_PATIENCE));
            }
        } else {
            self.consecutive_increases = 0;
        }
        Ok(after)
    }
}

/// Gradient-descent driver; trace has one record per iteration.
pub fn wf_run(
    ensemble: &MeasurementEnsemble,
    x0: &[Complex],
    config: &WfConfig,
) -> Result<(Vec<Complex>, RunTrace)> {
    wf_run_with_reference(ensemble, x0, config, None)
}

pub fn wf_run_with_reference(
    ensemble: &MeasurementEnsemble,
    x0: &[Complex],
    config: &WfConfig,
    reference: Option<&[Complex]>,
) -> Result<(Vec<Complex>, RunTrace)> {
    let mut solver = WfSolver::new(ensemble, x0, config.clone())?;
    let tol = config.tol.unwrap_or(1e-10 * solver.objective().max(1.0));
    let mut trace = RunTrace::default();
    let record = |solver: &WfSolver, iter: usize, trace: &mut RunTrace| {
        let rel_error = reference
            .map(|r| relative_recovery_error(&solver.state.signal(), r))
            .transpose()
            .unwrap_or(None);
        trace.push(TraceRecord {
            cycle: iter,
            objective: solver.objective(),
            rel_error,
            isi: None,
            coord_updates: solver.iterations,
        });
    };
    record(&solver, 0, &mut trace);
    for iter in 1..=config.max_iters {
        let before = solver.objective();
        let after = solver.step()?;
        let done = (before - after).abs() < tol && after <= before;
        if done || iter % config.trace_every == 0 {
            record(&solver, iter, &mut trace);
        }
        if done {
            break;
        }
    }
    Ok((solver.state.signal(), trace))
}
