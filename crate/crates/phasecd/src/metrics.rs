//! Recovery metrics and per-run traces.
//!
//! Phase retrieval recovers the signal only up to a global phase, so error
//! is measured as distance to the phase orbit {e^{j phi} x_ref}.

use crate::ensemble::Complex;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Relative recovery error below this counts as exact recovery.
pub const SUCCESS_THRESHOLD: f64 = 1e-5;

/// min over phi of ||z - e^{j phi} x_ref|| =
/// sqrt(||z||^2 + ||x_ref||^2 - 2 |x_ref^H z|).
pub fn dist_to_orbit(z: &[Complex], x_ref: &[Complex]) -> Result<f64> {
    if z.len() != x_ref.len() {
        return Err(Error::DimensionMismatch {
            expected: x_ref.len(),
            got: z.len(),
        });
    }
    let zz: f64 = z.iter().map(|v| v.norm_sqr()).sum();
    let xx: f64 = x_ref.iter().map(|v| v.norm_sqr()).sum();
    let inner: Complex = x_ref.iter().zip(z).map(|(x, zi)| x.conj() * zi).sum();
    // tiny negative values from cancellation are clamped
    Ok((zz + xx - 2.0 * inner.norm()).max(0.0).sqrt())
}

/// dist_to_orbit(z, x_ref)^2 / ||x_ref||^2.
pub fn relative_recovery_error(z: &[Complex], x_ref: &[Complex]) -> Result<f64> {
    let xx: f64 = x_ref.iter().map(|v| v.norm_sqr()).sum();
    if xx == 0.0 {
        return Err(Error::ZeroReference);
    }
    let d = dist_to_orbit(z, x_ref)?;
    Ok(d * d / xx)
}

/// One per-cycle (or per-iteration, for gradient baselines) sample of a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRecord {
    pub cycle: usize,
    pub objective: f64,
    pub rel_error: Option<f64>,
    pub isi: Option<f64>,
    /// Cumulative coordinate updates (iterations) so far.
    pub coord_updates: u64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
}

impl RunTrace {
    pub fn push(&mut self, rec: TraceRecord) {
        self.records.push(rec);
    }

    pub fn final_objective(&self) -> Option<f64> {
        self.records.last().map(|r| r.objective)
    }

    pub fn cycles(&self) -> usize {
        self.records.last().map(|r| r.cycle).unwrap_or(0)
    }

    /// Index of the first record with objective <= level, if any.
    pub fn first_cycle_below(&self, level: f64) -> Option<usize> {
        self.records
            .iter()
            .find(|r| r.objective <= level)
            .map(|r| r.cycle)
    }

    pub fn is_monotone_nonincreasing(&self) -> bool {
        self.records
            .windows(2)
            .all(|w| w[1].objective <= w[0].objective)
    }
}
