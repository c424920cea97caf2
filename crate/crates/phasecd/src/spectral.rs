//! Spectral initialization: principal eigenvector of the weighted covariance
//! estimate Y = (1/M) sum_m b_m a_m a_m^H, by matrix-free power iteration.

use crate::ensemble::{Complex, MeasurementEnsemble};
use crate::rng::{stream, Purpose};
use crate::{Error, Result};
use rand_distr::StandardNormal;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralConfig {
    pub power_iters: usize,
    /// Stop when the eigenvector direction changes by less than this (sine of
    /// the angle between consecutive iterates, sign-invariant).
    pub tol: f64,
    pub seed: u64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            power_iters: 200,
            tol: 1e-8,
            seed: 0,
        }
    }
}

/// Y v = (1/M) sum_m b_m (a_m^H v) a_m, never materializing Y. O(MN).
fn apply_y(ensemble: &MeasurementEnsemble, v: &[Complex], shift: f64, out: &mut [Complex]) {
    let m = ensemble.m();
    let b = ensemble.intensities();
    for o in out.iter_mut() {
        *o = Complex::new(0.0, 0.0);
    }
    for k in 0..m {
        let row = ensemble.row(k);
        let z: Complex = row.iter().zip(v).map(|(a, vi)| a.conj() * vi).sum();
        let w = z * (b[k] / m as f64);
        for (o, a) in out.iter_mut().zip(row) {
            *o += w * a;
        }
    }
    if shift != 0.0 {
        for (o, vi) in out.iter_mut().zip(v) {
            *o += shift * vi;
        }
    }
}

fn normalize(v: &mut [Complex]) -> f64 {
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

fn power_iterate(
    ensemble: &MeasurementEnsemble,
    config: &SpectralConfig,
    shift: f64,
) -> (Vec<Complex>, f64) {
    let n = ensemble.n();
    let mut rng = stream(config.seed, Purpose::SolverInit, 0);
    let mut v: Vec<Complex> = (0..n)
        .map(|_| {
            Complex::new(
                rng.sample::<f64, _>(StandardNormal),
                rng.sample::<f64, _>(StandardNormal),
            )
        })
        .collect();
    normalize(&mut v);
    let mut yv = vec![Complex::new(0.0, 0.0); n];
    let mut rayleigh = 0.0;
    for _ in 0..config.power_iters.max(1) {
        apply_y(ensemble, &v, shift, &mut yv);
        // Rayleigh quotient <v, Yv> is real since Y is Hermitian
        rayleigh = v.iter().zip(&yv).map(|(a, b)| (a.conj() * b).re).sum();
        let norm = normalize(&mut yv);
        if norm == 0.0 {
            break;
        }
        // sign-invariant angle between consecutive directions
        let overlap: f64 = v
            .iter()
            .zip(&yv)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex>()
            .norm();
        std::mem::swap(&mut v, &mut yv);
        if (1.0 - overlap.min(1.0)) < config.tol {
            break;
        }
    }
    (v, rayleigh)
}

/// Principal eigenvector of Y, rescaled so that
/// ||x0||^2 = N ||b||_1 / sum_m ||a_m||^2.
///
/// Negative intensities (possible under noise) are kept as-is; if the
/// dominant eigenvalue turns out negative, the iteration is re-run on the
/// shifted operator Y + |lambda| I to pull out the largest algebraic
/// eigenvalue instead.
pub fn spectral_init(ensemble: &MeasurementEnsemble, config: &SpectralConfig) -> Result<Vec<Complex>> {
    let b = ensemble.intensities();
    if b.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateSpectral);
    }
    let (mut v, rayleigh) = power_iterate(ensemble, config, 0.0);
    if rayleigh < 0.0 {
        // dominant-by-magnitude eigenvalue is negative; shift to target the
        // top of the spectrum
        let (v2, _) = power_iterate(ensemble, config, rayleigh.abs());
        v = v2;
    }
    let b_l1: f64 = b.iter().map(|x| x.abs()).sum();
    let target_sq = ensemble.n() as f64 * b_l1 / ensemble.rows_sq_norm();
    let scale = target_sq.sqrt();
    for x in v.iter_mut() {
        *x *= scale;
    }
    Ok(v)
}
