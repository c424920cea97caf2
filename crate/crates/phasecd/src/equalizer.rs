//! Blind equalization via the constant-modulus criterion.
//!
//! Stacking received-signal windows r_n = [r(n), ..., r(n-P+1)] as ensemble
//! rows with every intensity equal to the dispersion constant kappa turns
//! min_w sum_n (|w^H r_n|^2 - kappa)^2 into the exact objective the
//! phase-retrieval solvers already minimize, so they run here unchanged.

use crate::cd::{CdSolver, SolverConfig};
use crate::ensemble::{Complex, MeasurementEnsemble};
use crate::metrics::{RunTrace, TraceRecord};
use crate::rng::{stream, Purpose};
use crate::spectral::{spectral_init, SpectralConfig};
use crate::wf::{WfConfig, WfSolver};
use crate::{Error, Result};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// 7-tap test channel used throughout the examples and benchmarks.
pub fn default_channel_taps() -> Vec<f64> {
    vec![0.4, 1.0, -0.7, 0.6, 0.3, -0.4, 0.1]
}

#[derive(Debug, Clone)]
pub struct ChannelModel {
    taps: Vec<Complex>,
}

impl ChannelModel {
    pub fn new(taps: Vec<Complex>) -> Result<Self> {
        if taps.iter().all(|t| t.norm_sqr() == 0.0) {
            return Err(Error::IdenticallyZero);
        }
        Ok(Self { taps })
    }

    pub fn from_real(taps: &[f64]) -> Result<Self> {
        Self::new(taps.iter().map(|&t| Complex::new(t, 0.0)).collect())
    }

    pub fn taps(&self) -> &[Complex] {
        &self.taps
    }
}

/// I.i.d. uniform draws from {1, -1, j, -j}.
pub fn gen_qpsk(n_symbols: usize, seed: u64) -> Vec<Complex> {
    let mut rng = stream(seed, Purpose::Symbols, 0);
    (0..n_symbols)
        .map(|_| match rng.gen_range(0..4u8) {
            0 => Complex::new(1.0, 0.0),
            1 => Complex::new(-1.0, 0.0),
            2 => Complex::new(0.0, 1.0),
            _ => Complex::new(0.0, -1.0),
        })
        .collect()
}

/// Causal convolution r(n) = sum_k h_k s(n-k), same length as `s`, plus
/// complex white Gaussian noise at the target SNR relative to the realized
/// clean-output power.
pub fn channel_output(
    channel: &ChannelModel,
    s: &[Complex],
    snr_db: Option<f64>,
    seed: u64,
) -> Vec<Complex> {
    let h = channel.taps();
    let mut r: Vec<Complex> = (0..s.len())
        .map(|n| {
            h.iter()
                .enumerate()
                .take_while(|(k, _)| *k <= n)
                .map(|(k, hk)| hk * s[n - k])
                .sum()
        })
        .collect();
    if let Some(db) = snr_db {
        let power: f64 = r.iter().map(|v| v.norm_sqr()).sum::<f64>() / r.len().max(1) as f64;
        let sigma = (power / 10f64.powf(db / 10.0)).sqrt();
        let comp_std = sigma * std::f64::consts::FRAC_1_SQRT_2;
        let mut rng = stream(seed, Purpose::Noise, 0);
        for v in r.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *v += Complex::new(comp_std * re, comp_std * im);
        }
    }
    r
}

/// kappa = E|s|^4 / E|s|^2, estimated from the given symbols. For a
/// strictly constant-modulus constellation this is the squared modulus.
pub fn dispersion_constant(symbols: &[Complex]) -> Result<f64> {
    let p2: f64 = symbols.iter().map(|s| s.norm_sqr()).sum();
    if p2 == 0.0 {
        return Err(Error::IdenticallyZero);
    }
    let p4: f64 = symbols.iter().map(|s| s.norm_sqr().powi(2)).sum();
    Ok(p4 / p2)
}

/// Ensemble whose rows are the length-P windows r_n = [r(n), ..., r(n-P+1)]
/// (n = P-1 .. len-1) and whose intensities are all kappa.
pub fn build_cma_ensemble(
    received: &[Complex],
    p: usize,
    kappa: f64,
) -> Result<MeasurementEnsemble> {
    if p == 0 {
        return Err(Error::InvalidConfig("equalizer length must be >= 1".into()));
    }
    if !(kappa > 0.0) {
        return Err(Error::InvalidConfig("kappa must be > 0".into()));
    }
    if received.len() < p {
        return Err(Error::NotEnoughSamples {
            need: p,
            got: received.len(),
        });
    }
    let m = received.len() - p + 1;
    let mut rows = Vec::with_capacity(m * p);
    for n in (p - 1)..received.len() {
        for k in 0..p {
            rows.push(received[n - k]);
        }
    }
    MeasurementEnsemble::new(rows, vec![kappa; m], p)
}

/// Residual intersymbol interference of the combined response v = h * w:
/// (sum_n |v_n|^2 - max_n |v_n|^2) / max_n |v_n|^2. Zero iff v is a single
/// spike, i.e. the channel is perfectly equalized up to delay/phase/scale.
pub fn isi(channel: &ChannelModel, w: &[Complex]) -> Result<f64> {
    let h = channel.taps();
    if w.is_empty() {
        return Err(Error::IdenticallyZero);
    }
    let len = h.len() + w.len() - 1;
    let mut total = 0.0f64;
    let mut peak = 0.0f64;
    for n in 0..len {
        let mut v = Complex::new(0.0, 0.0);
        for (k, hk) in h.iter().enumerate() {
            if n >= k && n - k < w.len() {
                v += hk * w[n - k];
            }
        }
        let mag = v.norm_sqr();
        total += mag;
        peak = peak.max(mag);
    }
    if peak == 0.0 {
        return Err(Error::IdenticallyZero);
    }
    Ok((total - peak) / peak)
}

/// w = e_{ceil(P/2)}: unit spike at the middle tap.
pub fn center_tap_init(p: usize) -> Vec<Complex> {
    let mut w = vec![Complex::new(0.0, 0.0); p];
    w[(p + 1) / 2 - 1] = Complex::new(1.0, 0.0);
    w
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EqSolver {
    Cd(SolverConfig),
    Wf(WfConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EqInit {
    CenterTap,
    Spectral,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EqConfig {
    pub n_symbols: usize,
    /// Equalizer length P.
    pub p: usize,
    pub snr_db: Option<f64>,
    pub solver: EqSolver,
    pub init: EqInit,
    /// Seeds the symbol and noise streams.
    pub seed: u64,
}

impl Default for EqConfig {
    fn default() -> Self {
        Self {
            n_symbols: 2000,
            p: 16,
            snr_db: Some(25.0),
            solver: EqSolver::Cd(SolverConfig::default()),
            init: EqInit::CenterTap,
            seed: 0,
        }
    }
}

/// Full pipeline: QPSK symbols -> channel -> CMA ensemble -> solver, with
/// the ISI of the combined response recorded once per cycle (CD) or
/// iteration (WF) in the trace.
pub fn equalize_run(channel: &ChannelModel, config: &EqConfig) -> Result<(Vec<Complex>, RunTrace)> {
    if config.n_symbols < config.p {
        return Err(Error::NotEnoughSamples {
            need: config.p,
            got: config.n_symbols,
        });
    }
    let s = gen_qpsk(config.n_symbols, config.seed);
    let r = channel_output(channel, &s, config.snr_db, config.seed);
    let kappa = dispersion_constant(&s)?;
    let ensemble = build_cma_ensemble(&r, config.p, kappa)?;
    let w0 = match config.init {
        EqInit::CenterTap => center_tap_init(config.p),
        EqInit::Spectral => spectral_init(
            &ensemble,
            &SpectralConfig {
                seed: config.seed,
                ..Default::default()
            },
        )?,
    };

    let mut trace = RunTrace::default();
    match &config.solver {
        EqSolver::Cd(cd_config) => {
            let mut solver = CdSolver::new(&ensemble, &w0, cd_config.clone())?;
            let tol = cd_config.effective_tol(solver.objective());
            let record = |solver: &CdSolver, cycle: usize, trace: &mut RunTrace| {
                trace.push(TraceRecord {
                    cycle,
                    objective: solver.objective(),
                    rel_error: None,
                    isi: isi(channel, &solver.state().signal()).ok(),
                    coord_updates: solver.iterations(),
                });
            };
            record(&solver, 0, &mut trace);
            for cycle in 1..=cd_config.max_cycles {
                let before = solver.objective();
                let after = solver.cycle()?;
                record(&solver, cycle, &mut trace);
                if before - after < tol {
                    break;
                }
            }
            Ok((solver.state().signal(), trace))
        }
        EqSolver::Wf(wf_config) => {
            let mut solver = WfSolver::new(&ensemble, &w0, wf_config.clone())?;
            let tol = wf_config.tol.unwrap_or(1e-10 * solver.objective().max(1.0));
            let record = |solver: &WfSolver, iter: usize, trace: &mut RunTrace| {
                trace.push(TraceRecord {
                    cycle: iter,
                    objective: solver.objective(),
                    rel_error: None,
                    isi: isi(channel, &solver.state().signal()).ok(),
                    coord_updates: solver.iterations(),
                });
            };
            record(&solver, 0, &mut trace);
            for iter in 1..=wf_config.max_iters {
                let before = solver.objective();
                let after = solver.step()?;
                record(&solver, iter, &mut trace);
                if (before - after).abs() < tol && after <= before {
                    break;
                }
            }
            Ok((solver.state().signal(), trace))
        }
    }
}
