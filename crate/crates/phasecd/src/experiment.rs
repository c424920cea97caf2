//! Monte-Carlo experiment orchestration: named solver lineup, per-trial
//! instance generation, trace/summary serialization, and aggregation.
//!
//! Trial i of every solver shares one problem instance (seeded from the
//! base seed and i), so success-rate and speed comparisons are paired.

use crate::cd::{self, SolverConfig, Variant};
use crate::equalizer::{default_channel_taps, isi, ChannelModel, EqConfig, EqInit, EqSolver};
use crate::measurement::{gen_instance, GenConfig};
use crate::metrics::{relative_recovery_error, RunTrace, SUCCESS_THRESHOLD};
use crate::rng::derive_seed;
use crate::sparse::{default_tau, l1_run_with_reference, L1Config, L1Variant};
use crate::spectral::{spectral_init, SpectralConfig};
use crate::wf::{default_fixed_mu, wf_run_with_reference, WfConfig, WfPolicy};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverSpec {
    /// Cyclic coordinate descent.
    Ccd,
    /// Randomized coordinate descent.
    Rcd,
    /// Greedy (largest-partial) coordinate descent.
    Gcd,
    /// Gradient descent with a fixed stepsize.
    Wf,
    /// Gradient descent with an exact line search.
    Wfls,
    /// l1-regularized cyclic CD.
    L1Ccd,
    /// l1-regularized randomized CD.
    L1Rcd,
}

impl SolverSpec {
    pub const ALL: [SolverSpec; 7] = [
        SolverSpec::Ccd,
        SolverSpec::Rcd,
        SolverSpec::Gcd,
        SolverSpec::Wf,
        SolverSpec::Wfls,
        SolverSpec::L1Ccd,
        SolverSpec::L1Rcd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverSpec::Ccd => "ccd",
            SolverSpec::Rcd => "rcd",
            SolverSpec::Gcd => "gcd",
            SolverSpec::Wf => "wf",
            SolverSpec::Wfls => "wfls",
            SolverSpec::L1Ccd => "l1-ccd",
            SolverSpec::L1Rcd => "l1-rcd",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|v| v.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "unknown solver '{s}'; expected one of: {}",
                    Self::ALL.map(|v| v.name()).join(", ")
                ))
            })
    }

    /// Comma-separated list, e.g. "ccd,rcd,wf".
    pub fn parse_list(s: &str) -> Result<Vec<Self>> {
        s.split(',').filter(|p| !p.trim().is_empty()).map(Self::parse).collect()
    }

    pub fn is_l1(self) -> bool {
        matches!(self, SolverSpec::L1Ccd | SolverSpec::L1Rcd)
    }
}

impl fmt::Display for SolverSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Fixed-size recovery: success rate and error per solver.
    Recover,
    /// Sparse-signal recovery (set `generation.k` and `tau`).
    Sparse,
    /// Blind equalization on the FIR test channel.
    Equalize,
    /// Success probability vs. oversampling ratio M/N.
    SuccessCurve,
    /// Mean relative error vs. SNR.
    NmseCurve,
}

/// Channel/equalizer parameters for `equalize` experiments.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EqSpec {
    pub channel_taps: Vec<f64>,
    pub n_symbols: usize,
    /// Equalizer length P.
    pub p: usize,
    pub snr_db: Option<f64>,
}

impl Default for EqSpec {
    fn default() -> Self {
        Self {
            channel_taps: default_channel_taps(),
            n_symbols: 2000,
            p: 16,
            snr_db: Some(25.0),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub generation: GenConfig,
    pub solvers: Vec<SolverSpec>,
    pub trials: usize,
    pub base_seed: u64,
    /// l1 weight; `None` means 2.35 * M.
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default = "default_max_cycles")]
    pub max_cycles: usize,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default = "default_trace_every")]
    pub trace_every: usize,
    #[serde(default)]
    pub equalizer: EqSpec,
    /// M/N grid for `success-curve`.
    #[serde(default = "default_ratios")]
    pub ratios: Vec<f64>,
    /// SNR grid (dB) for `nmse-curve`.
    #[serde(default = "default_snrs")]
    pub snrs: Vec<f64>,
}

fn default_max_cycles() -> usize {
    1000
}

fn default_trace_every() -> usize {
    1
}

fn default_ratios() -> Vec<f64> {
    vec![2.0, 3.0, 4.0, 5.0, 6.0]
}

fn default_snrs() -> Vec<f64> {
    vec![6.0, 10.0, 14.0, 18.0, 22.0, 26.0, 30.0]
}

impl ExperimentSpec {
    pub fn recover_defaults() -> Self {
        Self {
            kind: ExperimentKind::Recover,
            generation: GenConfig {
                n: 32,
                m: 192,
                k: None,
                snr_db: None,
                seed: 0,
            },
            solvers: vec![SolverSpec::Ccd, SolverSpec::Rcd, SolverSpec::Gcd, SolverSpec::Wf],
            trials: 50,
            base_seed: 0,
            tau: None,
            max_cycles: default_max_cycles(),
            tol: None,
            trace_every: default_trace_every(),
            equalizer: EqSpec::default(),
            ratios: default_ratios(),
            snrs: default_snrs(),
        }
    }

    pub fn sparse_defaults() -> Self {
        Self {
            kind: ExperimentKind::Sparse,
            generation: GenConfig {
                n: 64,
                m: 128,
                k: Some(5),
                snr_db: None,
                seed: 0,
            },
            solvers: vec![SolverSpec::L1Ccd, SolverSpec::L1Rcd, SolverSpec::Ccd],
            trials: 50,
            ..Self::recover_defaults()
        }
    }

    pub fn equalize_defaults() -> Self {
        Self {
            kind: ExperimentKind::Equalize,
            solvers: vec![SolverSpec::Ccd, SolverSpec::Wfls],
            trials: 20,
            ..Self::recover_defaults()
        }
    }

    pub fn curve_defaults() -> Self {
        Self {
            kind: ExperimentKind::SuccessCurve,
            generation: GenConfig {
                n: 64,
                m: 0, // set per curve point
                k: None,
                snr_db: None,
                seed: 0,
            },
            trials: 50,
            ..Self::recover_defaults()
        }
    }

    /// Every violated field, not just the first.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.trials == 0 {
            v.push("trials: must be >= 1".into());
        }
        if self.solvers.is_empty() {
            v.push("solvers: must be non-empty".into());
        }
        if self.max_cycles == 0 {
            v.push("max_cycles: must be >= 1".into());
        }
        if self.trace_every == 0 {
            v.push("trace_every: must be >= 1".into());
        }
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                v.push("tol: must be > 0".into());
            }
        }
        if let Some(t) = self.tau {
            if !(t > 0.0) {
                v.push("tau: must be > 0".into());
            }
        }
        match self.kind {
            ExperimentKind::Equalize => {
                if self.equalizer.p == 0 {
                    v.push("equalizer.p: must be >= 1".into());
                }
                if self.equalizer.n_symbols < self.equalizer.p {
                    v.push("equalizer.n_symbols: must be >= equalizer.p".into());
                }
                if self.equalizer.channel_taps.iter().all(|&t| t == 0.0) {
                    v.push("equalizer.channel_taps: must have a nonzero tap".into());
                }
                for s in &self.solvers {
                    if s.is_l1() {
                        v.push(format!(
                            "solvers: {s} is not applicable to equalization"
                        ));
                    }
                }
            }
            ExperimentKind::SuccessCurve => {
                if self.ratios.is_empty() {
                    v.push("ratios: must be non-empty".into());
                }
                if self.ratios.iter().any(|&r| !(r > 0.0)) {
                    v.push("ratios: entries must be > 0".into());
                }
                if let Err(e) = self.point_generation(self.generation.n * 2).validate() {
                    v.push(format!("generation: {e}"));
                }
            }
            ExperimentKind::NmseCurve => {
                if self.snrs.is_empty() {
                    v.push("snrs: must be non-empty".into());
                }
                if let Err(e) = self.generation.validate() {
                    v.push(format!("generation: {e}"));
                }
            }
            ExperimentKind::Recover | ExperimentKind::Sparse => {
                if let Err(e) = self.generation.validate() {
                    v.push(format!("generation: {e}"));
                }
                if self.kind == ExperimentKind::Sparse && self.generation.k.is_none() {
                    v.push("generation.k: required for sparse experiments".into());
                }
            }
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(v.join("; ")))
        }
    }

    fn effective_tau(&self) -> f64 {
        self.tau.unwrap_or_else(|| default_tau(self.generation.m))
    }

    fn point_generation(&self, m: usize) -> GenConfig {
        GenConfig {
            m,
            ..self.generation.clone()
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub solver: SolverSpec,
    pub trial: usize,
    pub trial_seed: u64,
    pub cycles: usize,
    pub final_objective: f64,
    pub rel_error: Option<f64>,
    /// rel_error < 1e-5, when a reference signal exists.
    pub success: Option<bool>,
    pub wall_time_s: f64,
    pub final_isi: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverAggregate {
    pub solver: SolverSpec,
    pub trials: usize,
    pub success_rate: Option<f64>,
    /// Mean relative recovery error.
    pub nmse: Option<f64>,
    pub mean_cycles: f64,
    pub mean_wall_time_s: f64,
    pub mean_final_isi: Option<f64>,
}

/// One point of a success or NMSE curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvePoint {
    /// M/N for success curves, SNR in dB for NMSE curves.
    pub x: f64,
    pub aggregates: Vec<SolverAggregate>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub spec: ExperimentSpec,
    pub records: Vec<SummaryRecord>,
    pub aggregates: Vec<SolverAggregate>,
    pub curve: Option<Vec<CurvePoint>>,
}

/// Per-solver means over the given records. Errors on empty input.
pub fn aggregate(records: &[SummaryRecord]) -> Result<Vec<SolverAggregate>> {
    if records.is_empty() {
        return Err(Error::InvalidConfig("no records to aggregate".into()));
    }
    let mut order: Vec<SolverSpec> = Vec::new();
    for r in records {
        if !order.contains(&r.solver) {
            order.push(r.solver);
        }
    }
    Ok(order
        .into_iter()
        .map(|solver| {
            let group: Vec<&SummaryRecord> =
                records.iter().filter(|r| r.solver == solver).collect();
            let n = group.len() as f64;
            let successes: Vec<bool> = group.iter().filter_map(|r| r.success).collect();
            let errors: Vec<f64> = group.iter().filter_map(|r| r.rel_error).collect();
            let isis: Vec<f64> = group.iter().filter_map(|r| r.final_isi).collect();
            SolverAggregate {
                solver,
                trials: group.len(),
                success_rate: (!successes.is_empty()).then(|| {
                    successes.iter().filter(|&&s| s).count() as f64 / successes.len() as f64
                }),
                nmse: (!errors.is_empty())
                    .then(|| errors.iter().sum::<f64>() / errors.len() as f64),
                mean_cycles: group.iter().map(|r| r.cycles as f64).sum::<f64>() / n,
                mean_wall_time_s: group.iter().map(|r| r.wall_time_s).sum::<f64>() / n,
                mean_final_isi: (!isis.is_empty())
                    .then(|| isis.iter().sum::<f64>() / isis.len() as f64),
            }
        })
        .collect())
}

fn cd_config(spec: &ExperimentSpec, variant: Variant, solver_seed: u64) -> SolverConfig {
    SolverConfig {
        variant,
        tol: spec.tol,
        max_cycles: spec.max_cycles,
        seed: solver_seed,
        step_bound_eta: None,
        trace_every: spec.trace_every,
    }
}

/// One (solver, trial) cell of a recovery-style experiment.
fn run_recovery_trial(
    spec: &ExperimentSpec,
    generation: &GenConfig,
    solver: SolverSpec,
    trial: usize,
) -> Result<(SummaryRecord, RunTrace)> {
    let trial_seed = derive_seed(spec.base_seed, &[trial as u64]);
    let solver_seed = derive_seed(spec.base_seed, &[trial as u64, solver as u64]);
    let gen = GenConfig {
        seed: trial_seed,
        ..generation.clone()
    };
    let (ensemble, x) = gen_instance(&gen)?;
    let x0 = spectral_init(
        &ensemble,
        &SpectralConfig {
            seed: trial_seed,
            ..Default::default()
        },
    )?;
    let started = Instant::now();
    let (xhat, trace) = match solver {
        SolverSpec::Ccd => {
            cd::run_with_reference(&ensemble, &x0, &cd_config(spec, Variant::Cyclic, solver_seed), Some(&x))?
        }
        SolverSpec::Rcd => {
            cd::run_with_reference(&ensemble, &x0, &cd_config(spec, Variant::Random, solver_seed), Some(&x))?
        }
        SolverSpec::Gcd => {
            cd::run_with_reference(&ensemble, &x0, &cd_config(spec, Variant::Greedy, solver_seed), Some(&x))?
        }
        SolverSpec::Wf => {
            let config = WfConfig {
                policy: WfPolicy::Fixed {
                    mu: default_fixed_mu(&x0),
                },
                tol: spec.tol,
                max_iters: spec.max_cycles,
                trace_every: spec.trace_every,
            };
            wf_run_with_reference(&ensemble, &x0, &config, Some(&x))?
        }
        SolverSpec::Wfls => {
            let config = WfConfig {
                policy: WfPolicy::ExactLineSearch,
                tol: spec.tol,
                max_iters: spec.max_cycles,
                trace_every: spec.trace_every,
            };
            wf_run_with_reference(&ensemble, &x0, &config, Some(&x))?
        }
        SolverSpec::L1Ccd | SolverSpec::L1Rcd => {
            let config = L1Config {
                variant: if solver == SolverSpec::L1Ccd {
                    L1Variant::Ccd
                } else {
                    L1Variant::Rcd
                },
                tau: spec.effective_tau(),
                tol: spec.tol,
                max_cycles: spec.max_cycles,
                seed: solver_seed,
                trace_every: spec.trace_every,
                debias: false,
            };
            l1_run_with_reference(&ensemble, &x0, &config, Some(&x))?
        }
    };
    let wall_time_s = started.elapsed().as_secs_f64();
    let rel_error = relative_recovery_error(&xhat, &x)?;
    Ok((
        SummaryRecord {
            solver,
            trial,
            trial_seed,
            cycles: trace.cycles(),
            final_objective: trace.final_objective().unwrap_or(f64::NAN),
            rel_error: Some(rel_error),
            success: Some(rel_error < SUCCESS_THRESHOLD),
            wall_time_s,
            final_isi: None,
        },
        trace,
    ))
}

fn run_equalize_trial(
    spec: &ExperimentSpec,
    solver: SolverSpec,
    trial: usize,
) -> Result<(SummaryRecord, RunTrace)> {
    let trial_seed = derive_seed(spec.base_seed, &[trial as u64]);
    let solver_seed = derive_seed(spec.base_seed, &[trial as u64, solver as u64]);
    let channel = ChannelModel::from_real(&spec.equalizer.channel_taps)?;
    let eq_solver = match solver {
        SolverSpec::Ccd => EqSolver::Cd(cd_config(spec, Variant::Cyclic, solver_seed)),
        SolverSpec::Rcd => EqSolver::Cd(cd_config(spec, Variant::Random, solver_seed)),
        SolverSpec::Gcd => EqSolver::Cd(cd_config(spec, Variant::Greedy, solver_seed)),
        SolverSpec::Wf => {
            // mu for the center-tap start: ||w0||^2 = 1
            EqSolver::Wf(WfConfig {
                policy: WfPolicy::Fixed { mu: 0.1 },
                tol: spec.tol,
                max_iters: spec.max_cycles,
                trace_every: spec.trace_every,
            })
        }
        SolverSpec::Wfls => EqSolver::Wf(WfConfig {
            policy: WfPolicy::ExactLineSearch,
            tol: spec.tol,
            max_iters: spec.max_cycles,
            trace_every: spec.trace_every,
        }),
        SolverSpec::L1Ccd | SolverSpec::L1Rcd => {
            return Err(Error::InvalidConfig(format!(
                "{solver} is not applicable to equalization"
            )))
        }
    };
    let config = EqConfig {
        n_symbols: spec.equalizer.n_symbols,
        p: spec.equalizer.p,
        snr_db: spec.equalizer.snr_db,
        solver: eq_solver,
        init: EqInit::CenterTap,
        seed: trial_seed,
    };
    let started = Instant::now();
    let (w, trace) = crate::equalizer::equalize_run(&channel, &config)?;
    let wall_time_s = started.elapsed().as_secs_f64();
    Ok((
        SummaryRecord {
            solver,
            trial,
            trial_seed,
            cycles: trace.cycles(),
            final_objective: trace.final_objective().unwrap_or(f64::NAN),
            rel_error: None,
            success: None,
            wall_time_s,
            final_isi: isi(&channel, &w).ok(),
        },
        trace,
    ))
}

fn run_cell(
    spec: &ExperimentSpec,
    generation: &GenConfig,
    solver: SolverSpec,
    trial: usize,
) -> Result<(SummaryRecord, RunTrace)> {
    match spec.kind {
        ExperimentKind::Equalize => run_equalize_trial(spec, solver, trial),
        _ => run_recovery_trial(spec, generation, solver, trial),
    }
}

/// All (solver, trial) cells, sequentially, in output order.
pub fn run_trials_seq(
    spec: &ExperimentSpec,
    generation: &GenConfig,
) -> Result<Vec<(SummaryRecord, RunTrace)>> {
    let mut out = Vec::with_capacity(spec.solvers.len() * spec.trials);
    for &solver in &spec.solvers {
        for trial in 0..spec.trials {
            out.push(run_cell(spec, generation, solver, trial)?);
        }
    }
    Ok(out)
}

/// All (solver, trial) cells, trials in parallel, same output order as the
/// sequential path.
#[cfg(feature = "parallel")]
pub fn run_trials_par(
    spec: &ExperimentSpec,
    generation: &GenConfig,
) -> Result<Vec<(SummaryRecord, RunTrace)>> {
    use rayon::prelude::*;
    let cells: Vec<(SolverSpec, usize)> = spec
        .solvers
        .iter()
        .flat_map(|&s| (0..spec.trials).map(move |t| (s, t)))
        .collect();
    cells
        .into_par_iter()
        .map(|(solver, trial)| run_cell(spec, generation, solver, trial))
        .collect()
}

pub fn run_trials(
    spec: &ExperimentSpec,
    generation: &GenConfig,
) -> Result<Vec<(SummaryRecord, RunTrace)>> {
    #[cfg(feature = "parallel")]
    {
        run_trials_par(spec, generation)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_trials_seq(spec, generation)
    }
}

/// Writes `cycle,objective,rel_error,isi` rows; floats carry 17 significant
/// digits, absent metrics stay blank.
pub fn write_trace_csv<W: std::io::Write>(mut w: W, trace: &RunTrace) -> std::io::Result<()> {
    writeln!(w, "cycle,objective,rel_error,isi")?;
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
    for r in &trace.records {
        writeln!(
            w,
            "{},{:.16e},{},{}",
            r.cycle,
            r.objective,
            fmt(r.rel_error),
            fmt(r.isi)
        )?;
    }
    Ok(())
}

fn trace_path(dir: &Path, solver: SolverSpec, trial: usize) -> std::path::PathBuf {
    dir.join(format!("trace_{}_{trial:04}.csv", solver.name()))
}

/// Runs the experiment; when `out_dir` is given, writes one trace CSV per
/// (solver, trial) and `summary.json`.
pub fn run_experiment(spec: &ExperimentSpec, out_dir: Option<&Path>) -> Result<ExperimentSummary> {
    spec.validate()?;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
    }

    let summary = match spec.kind {
        ExperimentKind::SuccessCurve | ExperimentKind::NmseCurve => {
            let points: Vec<(f64, GenConfig)> = match spec.kind {
                ExperimentKind::SuccessCurve => spec
                    .ratios
                    .iter()
                    .map(|&r| {
                        let m = (r * spec.generation.n as f64).round() as usize;
                        (r, spec.point_generation(m))
                    })
                    .collect(),
                _ => spec
                    .snrs
                    .iter()
                    .map(|&snr| {
                        (
                            snr,
                            GenConfig {
                                snr_db: Some(snr),
                                ..spec.generation.clone()
                            },
                        )
                    })
                    .collect(),
            };
            let mut curve = Vec::with_capacity(points.len());
            let mut records = Vec::new();
            for (x, generation) in points {
                let results = run_trials(spec, &generation)?;
                let point_records: Vec<SummaryRecord> =
                    results.into_iter().map(|(r, _)| r).collect();
                curve.push(CurvePoint {
                    x,
                    aggregates: aggregate(&point_records)?,
                });
                records.extend(point_records);
            }
            let aggregates = aggregate(&records)?;
            ExperimentSummary {
                spec: spec.clone(),
                records,
                aggregates,
                curve: Some(curve),
            }
        }
        _ => {
            let results = run_trials(spec, &spec.generation)?;
            if let Some(dir) = out_dir {
                for (record, trace) in &results {
                    let file = std::fs::File::create(trace_path(dir, record.solver, record.trial))?;
                    write_trace_csv(std::io::BufWriter::new(file), trace)?;
                }
            }
            let records: Vec<SummaryRecord> = results.into_iter().map(|(r, _)| r).collect();
            let aggregates = aggregate(&records)?;
            ExperimentSummary {
                spec: spec.clone(),
                records,
                aggregates,
                curve: None,
            }
        }
    };

    if let Some(dir) = out_dir {
        let file = std::fs::File::create(dir.join("summary.json"))?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), &summary)?;
    }
    Ok(summary)
}
