//! Solver state: the real-embedded iterate plus cached products z = Ax.
//!
//! A coordinate update changes one entry of xbar, so z moves along a fixed
//! complex direction per row. The direction is captured while the coordinate
//! restriction is built, and committing a step reuses it, so each CD
//! iteration reads every ensemble row exactly once.

use crate::embedding::{embed, unembed};
use crate::ensemble::{objective_from_products, Complex, MeasurementEnsemble};
use crate::{Error, Result};

/// Full cache recomputation after this many incremental updates, or at each
/// cycle boundary, whichever comes first. Bounds floating-point drift.
pub const REFRESH_INTERVAL: u64 = 10_000;

#[derive(Debug, Clone)]
pub struct SolverState {
    xbar: Vec<f64>,
    z: Vec<Complex>,
    objective: f64,
    /// dz_m/dalpha for the coordinate captured by the last restriction.
    step_dir: Vec<Complex>,
    step_coord: Option<usize>,
    updates_since_refresh: u64,
    /// Ensemble element reads on the solve path since the last reset: an
    /// element-per-row pass counts M, a full-row pass counts M*N. Cache
    /// maintenance (initialization, drift refresh) is not counted.
    /// Instrumentation for complexity checks.
    row_touches: u64,
}

impl SolverState {
    pub fn new(ensemble: &MeasurementEnsemble, x0: &[Complex]) -> Result<Self> {
        let z = ensemble.products(x0)?;
        let objective = objective_from_products(&z, ensemble.intensities());
        Ok(Self {
            xbar: embed(x0),
            z,
            objective,
            step_dir: vec![Complex::new(0.0, 0.0); ensemble.m()],
            step_coord: None,
            updates_since_refresh: 0,
            row_touches: 0,
        })
    }

    pub fn from_embedding(ensemble: &MeasurementEnsemble, xbar: &[f64]) -> Result<Self> {
        Self::new(ensemble, &unembed(xbar)?)
    }

    #[inline]
    pub fn xbar(&self) -> &[f64] {
        &self.xbar
    }

    pub fn signal(&self) -> Vec<Complex> {
        unembed(&self.xbar).expect("state embedding always has even length")
    }

    #[inline]
    pub fn objective(&self) -> f64 {
        self.objective
    }

    #[inline]
    pub fn products(&self) -> &[Complex] {
        &self.z
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.xbar.len()
    }

    pub fn row_touches(&self) -> u64 {
        self.row_touches
    }

    pub fn reset_row_touches(&mut self) {
        self.row_touches = 0;
    }

    pub(crate) fn count_row_pass(&mut self, rows: u64) {
        self.row_touches += rows;
    }

    /// Captures the per-row step direction for coordinate `i` while the
    /// restriction coefficients are being accumulated.
    pub(crate) fn begin_step(&mut self, i: usize) {
        self.step_coord = Some(i);
    }

    /// Split borrow: cached products (read) and step-direction scratch (write).
    #[inline]
    pub(crate) fn z_and_dirs(&mut self) -> (&[Complex], &mut [Complex]) {
        (&self.z, &mut self.step_dir)
    }

    /// Applies xbar[i] += alpha using the captured step directions; the new
    /// objective is phi(alpha) from the same restriction. O(M), no ensemble
    /// reads.
    pub(crate) fn commit_step(
        &mut self,
        ensemble: &MeasurementEnsemble,
        i: usize,
        alpha: f64,
        new_objective: f64,
    ) {
        debug_assert_eq!(self.step_coord, Some(i), "commit without matching restriction");
        self.xbar[i] += alpha;
        if alpha != 0.0 {
            for (zm, w) in self.z.iter_mut().zip(&self.step_dir) {
                *zm += alpha * w;
            }
            self.objective = new_objective;
            self.updates_since_refresh += 1;
            if self.updates_since_refresh >= REFRESH_INTERVAL {
                self.refresh(ensemble);
            }
        }
        self.step_coord = None;
        // periodic consistency check; a full check per step would dominate
        debug_assert!(
            self.updates_since_refresh % 257 != 256 || self.cache_consistent(ensemble, 1e-9)
        );
    }

    /// Incremental cache update after a single-coordinate change:
    /// z += delta * d(z)/d(xbar_i). O(M).
    pub fn apply_delta(
        &mut self,
        ensemble: &MeasurementEnsemble,
        i: usize,
        delta: f64,
    ) -> Result<()> {
        let n = ensemble.n();
        if i >= 2 * n {
            return Err(Error::IndexOutOfRange { index: i, dim: 2 * n });
        }
        self.xbar[i] += delta;
        if delta != 0.0 {
            let j = i % n;
            let imag_half = i >= n;
            for m in 0..ensemble.m() {
                let a = ensemble.row(m)[j].conj();
                let w = if imag_half { Complex::new(0.0, 1.0) * a } else { a };
                self.z[m] += delta * w;
            }
            self.count_row_pass(ensemble.m() as u64);
            self.objective = objective_from_products(&self.z, ensemble.intensities());
            self.updates_since_refresh += 1;
            if self.updates_since_refresh >= REFRESH_INTERVAL {
                self.refresh(ensemble);
            }
        }
        Ok(())
    }

    /// Full-vector step xbar += sbar with the matching cache increment
    /// dz = A^H(unembed(sbar)) supplied by the caller. O(M + N), no ensemble
    /// reads here.
    pub(crate) fn translate(
        &mut self,
        ensemble: &MeasurementEnsemble,
        sbar: &[f64],
        dz: &[Complex],
        new_objective: f64,
    ) {
        debug_assert_eq!(sbar.len(), self.xbar.len());
        debug_assert_eq!(dz.len(), self.z.len());
        for (x, s) in self.xbar.iter_mut().zip(sbar) {
            *x += s;
        }
        for (zm, w) in self.z.iter_mut().zip(dz) {
            *zm += w;
        }
        self.objective = new_objective;
        self.updates_since_refresh += 1;
        if self.updates_since_refresh >= REFRESH_INTERVAL {
            self.refresh(ensemble);
        }
    }

    pub(crate) fn clamp_objective(&mut self, value: f64) {
        self.objective = value;
    }

    /// Full O(MN) recomputation of the cached products and objective.
    pub fn refresh(&mut self, ensemble: &MeasurementEnsemble) {
        let x = self.signal();
        self.z = ensemble.products(&x).expect("state dimensions match ensemble");
        self.objective = objective_from_products(&self.z, ensemble.intensities());
        self.updates_since_refresh = 0;
    }

    pub fn cache_consistent(&self, ensemble: &MeasurementEnsemble, rel_tol: f64) -> bool {
        let fresh = ensemble
            .products(&self.signal())
            .expect("state dimensions match ensemble");
        let scale = fresh
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max)
            .max(1.0);
        self.z
            .iter()
            .zip(&fresh)
            .all(|(a, b)| (a - b).norm() <= rel_tol * scale)
    }
}
