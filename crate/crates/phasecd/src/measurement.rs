//! Synthetic problem generation: Gaussian sampling vectors, dense and sparse
//! ground-truth signals, and noise injection at a target SNR.
//!
//! All generators are pure functions of (config, seed); the per-purpose RNG
//! streams in [`crate::rng`] keep them independent of each other.

use crate::ensemble::{Complex, MeasurementEnsemble};
use crate::rng::{stream, Purpose};
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Per-component standard deviation of CN(0,1): each of Re/Im ~ N(0, 1/2),
/// so E|entry|^2 = 1.
const CPLX_STD: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenConfig {
    pub n: usize,
    pub m: usize,
    /// Sparsity of the ground truth; dense Gaussian signal when absent.
    pub k: Option<usize>,
    /// Noiseless when absent.
    pub snr_db: Option<f64>,
    pub seed: u64,
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::InvalidConfig("N and M must be >= 1".into()));
        }
        if let Some(k) = self.k {
            if k == 0 || k > self.n {
                return Err(Error::InvalidConfig(format!(
                    "sparsity K = {k} must satisfy 1 <= K <= N = {}",
                    self.n
                )));
            }
        }
        Ok(())
    }
}

fn complex_gaussian(rng: &mut impl Rng) -> Complex {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(re * CPLX_STD, im * CPLX_STD)
}

/// M sampling vectors of length N with i.i.d. CN(0,1) entries.
pub fn gen_gaussian_vectors(n: usize, m: usize, seed: u64) -> Vec<Vec<Complex>> {
    let mut rng = stream(seed, Purpose::SamplingVectors, 0);
    (0..m)
        .map(|_| (0..n).map(|_| complex_gaussian(&mut rng)).collect())
        .collect()
}

/// Dense ground-truth signal with i.i.d. CN(0,1) entries.
pub fn gen_signal(n: usize, seed: u64) -> Vec<Complex> {
    let mut rng = stream(seed, Purpose::Signal, 0);
    (0..n).map(|_| complex_gaussian(&mut rng)).collect()
}

/// K-sparse signal: support uniform over {0..N-1}; Re/Im of each nonzero drawn
/// uniformly from [-2/sqrt(2), -1/sqrt(2)] U [1/sqrt(2), 2/sqrt(2)].
pub fn gen_sparse_signal(n: usize, k: usize, seed: u64) -> Result<Vec<Complex>> {
    if k == 0 || k > n {
        return Err(Error::InvalidConfig(format!(
            "sparsity K = {k} out of range [1, {n}]"
        )));
    }
    let mut rng = stream(seed, Purpose::Signal, 0);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng);
    let mut x = vec![Complex::new(0.0, 0.0); n];
    let part = |rng: &mut rand_chacha::ChaCha8Rng| {
        let mag = rng.gen_range(CPLX_STD..2.0 * CPLX_STD);
        if rng.gen::<bool>() {
            mag
        } else {
            -mag
        }
    };
    for &i in idx.iter().take(k) {
        x[i] = Complex::new(part(&mut rng), part(&mut rng));
    }
    Ok(x)
}

/// b_m = |a_m^H x|^2 + nu_m, with real Gaussian noise scaled so the realized
/// SNR ||b_clean||^2 / (M sigma^2) hits the target; noiseless when `snr_db`
/// is absent.
pub fn measure(
    vectors: &[Vec<Complex>],
    x: &[Complex],
    snr_db: Option<f64>,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut clean = Vec::with_capacity(vectors.len());
    for a in vectors {
        if a.len() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: a.len(),
            });
        }
        let z: Complex = a.iter().zip(x).map(|(ai, xi)| ai.conj() * xi).sum();
        clean.push(z.norm_sqr());
    }
    match snr_db {
        None => Ok(clean),
        Some(db) => {
            let m = vectors.len() as f64;
            let energy: f64 = clean.iter().map(|b| b * b).sum();
            let sigma2 = energy / (m * 10f64.powf(db / 10.0));
            let sigma = sigma2.sqrt();
            let mut rng = stream(seed, Purpose::Noise, 0);
            Ok(clean
                .into_iter()
                .map(|b| b + sigma * rng.sample::<f64, _>(StandardNormal))
                .collect())
        }
    }
}

/// Elementwise square: magnitude measurements r_m -> intensity measurements.
pub fn magnitudes_to_intensities(r: &[f64]) -> Vec<f64> {
    r.iter().map(|v| v * v).collect()
}

/// Full instance from a generation config: (ensemble, ground truth).
pub fn gen_instance(cfg: &GenConfig) -> Result<(MeasurementEnsemble, Vec<Complex>)> {
    cfg.validate()?;
    let vectors = gen_gaussian_vectors(cfg.n, cfg.m, cfg.seed);
    let x = match cfg.k {
        Some(k) => gen_sparse_signal(cfg.n, k, cfg.seed)?,
        None => gen_signal(cfg.n, cfg.seed),
    };
    let b = measure(&vectors, &x, cfg.snr_db, cfg.seed)?;
    let ensemble = MeasurementEnsemble::from_rows(&vectors, b)?;
    Ok((ensemble, x))
}

/// Small random instance for tests.
#[doc(hidden)]
pub fn test_instance(
    n: usize,
    m: usize,
    snr_db: Option<f64>,
    seed: u64,
) -> (MeasurementEnsemble, Vec<Complex>) {
    gen_instance(&GenConfig {
        n,
        m,
        k: None,
        snr_db,
        seed,
    })
    .expect("valid test instance")
}
