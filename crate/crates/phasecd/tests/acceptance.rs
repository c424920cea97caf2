//! End-to-end acceptance gate. Each test exercises one release criterion and
//! prints a single `acceptance NN <name>: pass` line (visible with
//! `cargo test --test acceptance -- --nocapture`); a violated criterion fails
//! its test with the measured numbers.

use phasecd::cd::{cd_step, run_with_reference, select_index, SolverConfig, Variant};
use phasecd::equalizer::{default_channel_taps, ChannelModel, EqConfig, EqInit, EqSolver};
use phasecd::measurement::{gen_instance, gen_signal, GenConfig};
use phasecd::rng::{derive_seed, stream, Purpose};
use phasecd::sparse::{l1_cd_step, l1_run, L1Config, L1Variant};
use phasecd::spectral::{spectral_init, SpectralConfig};
use phasecd::wf::{wf_run, WfConfig};
use phasecd::{
    coordinate_coeffs, embed, fost, gradient, minimize_quartic, objective,
    relative_recovery_error, MeasurementEnsemble, SolverState,
};
use rand::Rng;
use rayon::prelude::*;
use std::time::Instant;

fn report(number: u32, name: &str, detail: String) {
    println!("acceptance {number:02} {name}: pass ({detail})");
}

/// 01: noiseless exact recovery at N=32, M=6N from a spectral start; every
/// solver succeeds (rel. error < 1e-5) in at least 90% of 50 trials, and the
/// whole sweep stays under two minutes.
#[test]
fn a01_noiseless_exact_recovery() {
    let t0 = Instant::now();
    let hits: Vec<[bool; 4]> = (0..50u64)
        .into_par_iter()
        .map(|trial| {
            let seed = derive_seed(101, &[trial]);
            let cfg = GenConfig { n: 32, m: 192, k: None, snr_db: None, seed };
            let (ensemble, x) = gen_instance(&cfg).unwrap();
            let x0 = spectral_init(&ensemble, &SpectralConfig { seed, ..Default::default() })
                .unwrap();
            let mut ok = [false; 4];
            for (slot, variant) in [Variant::Cyclic, Variant::Random, Variant::Greedy]
                .into_iter()
                .enumerate()
            {
                let cd = SolverConfig {
                    variant,
                    seed,
                    tol: Some(1e-16),
                    max_cycles: 2000,
                    ..Default::default()
                };
                let (xh, _) = run_with_reference(&ensemble, &x0, &cd, Some(&x)).unwrap();
                ok[slot] = relative_recovery_error(&xh, &x).unwrap() < 1e-5;
            }
            let wf = WfConfig { tol: Some(1e-16), max_iters: 5000, ..Default::default() };
            let (xw, _) = wf_run(&ensemble, &x0, &wf).unwrap();
            ok[3] = relative_recovery_error(&xw, &x).unwrap() < 1e-5;
            ok
        })
        .collect();
    let elapsed = t0.elapsed();
    let mut counts = [0usize; 4];
    for h in &hits {
        for (c, &b) in counts.iter_mut().zip(h) {
            *c += b as usize;
        }
    }
    for (name, c) in ["ccd", "rcd", "gcd", "wfls"].iter().zip(counts) {
        assert!(c >= 45, "{name}: only {c}/50 trials below 1e-5");
    }
    assert!(elapsed.as_secs() < 120, "sweep took {elapsed:?}");
    report(
        1,
        "noiseless exact recovery",
        format!(
            "ccd {}/50 rcd {}/50 gcd {}/50 wfls {}/50 in {elapsed:.2?}",
            counts[0], counts[1], counts[2], counts[3]
        ),
    );
}

/// 02: at 20 dB SNR, greedy CD reaches the level f* + 1e-3*||b||^2 in no more
/// cycles than cyclic CD, and every CD variant needs no more cycles than the
/// line-search gradient method needs iterations, on at least 80% of 50 seeds.
#[test]
fn a02_convergence_rate_ordering() {
    let ordered: Vec<bool> = (0..50u64)
        .into_par_iter()
        .map(|trial| {
            let seed = derive_seed(555, &[trial]);
            let cfg = GenConfig { n: 32, m: 192, k: None, snr_db: Some(20.0), seed };
            let (ensemble, x) = gen_instance(&cfg).unwrap();
            let x0 = spectral_init(&ensemble, &SpectralConfig { seed, ..Default::default() })
                .unwrap();
            let mut traces = Vec::new();
            for variant in [Variant::Cyclic, Variant::Random, Variant::Greedy] {
                let cd = SolverConfig { variant, seed, max_cycles: 500, ..Default::default() };
                let (_, t) = run_with_reference(&ensemble, &x0, &cd, Some(&x)).unwrap();
                traces.push(t);
            }
            let wf = WfConfig { max_iters: 2000, ..Default::default() };
            let (_, wf_trace) = wf_run(&ensemble, &x0, &wf).unwrap();
            let fstar = traces
                .iter()
                .map(|t| t.final_objective().unwrap())
                .chain([wf_trace.final_objective().unwrap()])
                .fold(f64::INFINITY, f64::min);
            let bsq: f64 = ensemble.intensities().iter().map(|b| b * b).sum();
            let level = fstar + 1e-3 * bsq;
            let miss = usize::MAX;
            let ccd = traces[0].first_cycle_below(level).unwrap_or(miss);
            let rcd = traces[1].first_cycle_below(level).unwrap_or(miss);
            let gcd = traces[2].first_cycle_below(level).unwrap_or(miss);
            let wfi = wf_trace.first_cycle_below(level).unwrap_or(miss);
            gcd <= ccd && ccd <= wfi && rcd <= wfi && gcd <= wfi && wfi < miss
        })
        .collect();
    let good = ordered.iter().filter(|&&b| b).count();
    assert!(good >= 40, "ordering held on only {good}/50 seeds");
    report(2, "convergence-rate ordering", format!("held on {good}/50 seeds"));
}

/// 03: the coordinate restriction matches direct objective evaluation at 11
/// probe points (rel. 1e-9), and the closed-form quartic minimizer is at
/// least as good as a million-point grid search (within 1e-8), on 10^4
/// random (instance, coordinate) pairs, in under a minute.
#[test]
fn a03_coordinate_minimizer_oracle() {
    let t0 = Instant::now();
    let instances: Vec<(MeasurementEnsemble, Vec<f64>)> = (0..100u64)
        .map(|k| {
            let cfg = GenConfig { n: 8, m: 24, k: None, snr_db: None, seed: 9000 + k };
            let (ensemble, _) = gen_instance(&cfg).unwrap();
            let point = embed(&gen_signal(8, 9500 + k));
            (ensemble, point)
        })
        .collect();
    let worst: Vec<(f64, f64)> = (0..10_000usize)
        .into_par_iter()
        .map(|pair| {
            let (ensemble, xbar) = &instances[pair / 100];
            let mut rng = stream(3000 + pair as u64, Purpose::CoordinatePick, 0);
            let i = rng.gen_range(0..2 * ensemble.n());
            let mut state = SolverState::from_embedding(ensemble, xbar).unwrap();
            let coeffs = coordinate_coeffs(ensemble, &mut state, i).unwrap();
            // 11 probes against a from-scratch objective evaluation
            let mut probe_err = 0.0f64;
            for k in 0..11 {
                let alpha = -2.5 + 0.5 * k as f64;
                let mut shifted = xbar.clone();
                shifted[i] += alpha;
                let direct = objective(ensemble, &shifted).unwrap();
                let rel = (coeffs.eval(alpha) - direct).abs() / direct.max(1.0);
                probe_err = probe_err.max(rel);
            }
            // exact minimizer vs. a 10^6-point grid over a root bound for
            // phi': |root| <= 1 + max coefficient ratio (Cauchy bound)
            let (_, phi_min) = minimize_quartic(&coeffs).unwrap();
            let r = 1.0
                + (3.0 * coeffs.d3)
                    .abs()
                    .max((2.0 * coeffs.d2).abs())
                    .max(coeffs.d1.abs())
                    / (4.0 * coeffs.d4);
            let grid_min = (0..=1_000_000)
                .map(|k| coeffs.eval(-r + 2.0 * r * k as f64 / 1e6))
                .fold(f64::INFINITY, f64::min);
            let slack = (phi_min - grid_min) / grid_min.abs().max(1.0);
            (probe_err, slack)
        })
        .collect();
    let elapsed = t0.elapsed();
    let max_probe = worst.iter().fold(0.0f64, |a, w| a.max(w.0));
    let max_slack = worst.iter().fold(f64::NEG_INFINITY, |a, w| a.max(w.1));
    assert!(max_probe < 1e-9, "worst probe mismatch {max_probe:.3e}");
    assert!(max_slack < 1e-8, "minimizer above grid by {max_slack:.3e}");
    assert!(elapsed.as_secs() < 60, "oracle sweep took {elapsed:?}");
    report(
        3,
        "coordinate-minimizer oracle",
        format!("probe err {max_probe:.2e}, grid slack {max_slack:.2e}, {elapsed:.2?}"),
    );
}

/// 04: the tracked objective (regularized objective for the l1 solvers) never
/// increases across more than 10^6 coordinate iterations. Each monitored run
/// stays below the cache-refresh interval so the cached objective is the
/// exact per-step quantity.
#[test]
fn a04_monotone_descent() {
    const ITERS_PER_RUN: usize = 9_000;
    let plain: Vec<(u64, usize)> = (0..80u64)
        .map(|run| (run, ITERS_PER_RUN))
        .collect();
    let plain_iters: Vec<(u64, u64)> = plain
        .par_iter()
        .map(|&(run, iters)| {
            let seed = derive_seed(404, &[run]);
            let cfg = GenConfig { n: 8, m: 32, k: None, snr_db: Some(15.0), seed };
            let (ensemble, _) = gen_instance(&cfg).unwrap();
            let x0 = gen_signal(8, seed ^ 0xabcd);
            let mut state = SolverState::new(&ensemble, &x0).unwrap();
            let variant = match run % 3 {
                0 => Variant::Cyclic,
                1 => Variant::Random,
                _ => Variant::Greedy,
            };
            let mut rng = stream(seed, Purpose::CoordinatePick, 0);
            let mut violations = 0u64;
            let mut prev = state.objective();
            for k in 0..iters as u64 {
                let i = select_index(variant, k, &ensemble, &mut state, &mut rng);
                cd_step(&ensemble, &mut state, i, None).unwrap();
                if state.objective() > prev {
                    violations += 1;
                }
                prev = state.objective();
            }
            (violations, iters as u64)
        })
        .collect();
    let l1_iters: Vec<(u64, u64)> = (0..40u64)
        .into_par_iter()
        .map(|run| {
            let seed = derive_seed(808, &[run]);
            let cfg = GenConfig { n: 8, m: 32, k: Some(3), snr_db: None, seed };
            let (ensemble, _) = gen_instance(&cfg).unwrap();
            let x0 = gen_signal(8, seed ^ 0x1234);
            let mut state = SolverState::new(&ensemble, &x0).unwrap();
            let tau = 0.5 * ensemble.m() as f64;
            let l1 = |xbar: &[f64]| xbar.iter().map(|v| v.abs()).sum::<f64>();
            let mut rng = stream(seed, Purpose::CoordinatePick, 0);
            let mut violations = 0u64;
            let mut prev = state.objective() + tau * l1(state.xbar());
            for k in 0..ITERS_PER_RUN as u64 {
                let i = if run % 2 == 0 {
                    (k % (2 * ensemble.n()) as u64) as usize
                } else {
                    rng.gen_range(0..2 * ensemble.n())
                };
                l1_cd_step(&ensemble, &mut state, i, tau).unwrap();
                let g = state.objective() + tau * l1(state.xbar());
                // the step's own accounting is exact; re-deriving g from the
                // state reintroduces summation-order rounding, hence the slack
                if g > prev + 1e-9 * prev.abs().max(1.0) {
                    violations += 1;
                }
                prev = g;
            }
            (violations, ITERS_PER_RUN as u64)
        })
        .collect();
    let total: u64 = plain_iters.iter().chain(&l1_iters).map(|&(_, n)| n).sum();
    let violations: u64 = plain_iters.iter().chain(&l1_iters).map(|&(v, _)| v).sum();
    assert!(total >= 1_000_000, "only {total} iterations exercised");
    assert_eq!(violations, 0, "{violations} objective increases in {total} iterations");
    report(4, "monotone descent", format!("0 violations in {total} iterations"));
}

/// 05: the analytic gradient matches central finite differences componentwise
/// to 1e-5 relative accuracy on 20 random instances with N <= 16, M <= 64.
#[test]
fn a05_gradient_matches_finite_differences() {
    let mut worst = 0.0f64;
    for trial in 0..20u64 {
        let seed = derive_seed(606, &[trial]);
        let mut rng = stream(seed, Purpose::SamplingVectors, 99);
        let n = rng.gen_range(2..=16usize);
        let m = rng.gen_range(2 * n..=64usize);
        let cfg = GenConfig { n, m, k: None, snr_db: Some(25.0), seed };
        let (ensemble, _) = gen_instance(&cfg).unwrap();
        let xbar = embed(&gen_signal(n, seed ^ 0x77));
        let g = gradient(&ensemble, &xbar).unwrap();
        let ginf = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let h = 1e-4;
        for i in 0..2 * n {
            let mut plus = xbar.clone();
            let mut minus = xbar.clone();
            plus[i] += h;
            minus[i] -= h;
            let fd = (objective(&ensemble, &plus).unwrap()
                - objective(&ensemble, &minus).unwrap())
                / (2.0 * h);
            // floor the denominator so a coincidentally tiny component does
            // not amplify quadrature noise into a spurious failure
            let rel = (g[i] - fd).abs() / fd.abs().max(1e-3 * ginf);
            worst = worst.max(rel);
        }
    }
    assert!(worst < 1e-5, "worst componentwise mismatch {worst:.3e}");
    report(5, "gradient vs finite differences", format!("worst rel err {worst:.2e}"));
}

/// 06: with the quartic terms zeroed, the fourth-order soft-threshold reduces
/// to the classical soft-threshold ST(-u1/(2 u2), tau/(2 u2)) to 1e-12.
#[test]
fn a06_fost_reduces_to_soft_threshold() {
    let mut rng = stream(42, Purpose::CoordinatePick, 6);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let u2 = rng.gen_range(0.05..10.0f64);
        let u1 = rng.gen_range(-10.0..10.0f64);
        let tau = rng.gen_range(0.0..5.0f64);
        let beta = fost(0.0, 0.0, u2, u1, tau).unwrap();
        let center = -u1 / (2.0 * u2);
        let thresh = tau / (2.0 * u2);
        let st = center.signum() * (center.abs() - thresh).max(0.0);
        let err = (beta - st).abs() / st.abs().max(1.0);
        worst = worst.max(err);
    }
    assert!(worst < 1e-12, "worst deviation {worst:.3e}");
    report(6, "fost soft-threshold degeneration", format!("worst err {worst:.2e}"));
}

/// 07: sparse separation at K=5, N=64, M=2N, tau=2.35M: with the best of
/// three spectral starts (picked by the regularized objective, no access to
/// the truth), l1-CCD recovers (rel. error < 1e-2) in at least 60% of 50
/// trials while plain CCD from the same starts recovers in at most 10%.
#[test]
fn a07_sparse_recovery_separation() {
    let errs: Vec<(f64, f64)> = (0..50u64)
        .into_par_iter()
        .map(|trial| {
            let seed = derive_seed(202, &[trial]);
            let cfg = GenConfig { n: 64, m: 128, k: Some(5), snr_db: None, seed };
            let (ensemble, x) = gen_instance(&cfg).unwrap();
            let tau = 2.35 * ensemble.m() as f64;
            let mut best_l1: Option<(f64, f64)> = None; // (objective, error)
            let mut best_cd: Option<(f64, f64)> = None;
            for start in 0..3u64 {
                let sc = SpectralConfig { seed: derive_seed(seed, &[start]), ..Default::default() };
                let x0 = spectral_init(&ensemble, &sc).unwrap();
                let l1 = L1Config {
                    variant: L1Variant::Ccd,
                    tau,
                    tol: None,
                    max_cycles: 2000,
                    seed,
                    trace_every: 1,
                    debias: false,
                };
                let (xh, t) = l1_run(&ensemble, &x0, &l1).unwrap();
                let g = t.final_objective().unwrap();
                let e = relative_recovery_error(&xh, &x).unwrap();
                if best_l1.map_or(true, |(bg, _)| g < bg) {
                    best_l1 = Some((g, e));
                }
                let cd = SolverConfig { seed, max_cycles: 2000, ..Default::default() };
                let (xp, tp) = run_with_reference(&ensemble, &x0, &cd, Some(&x)).unwrap();
                let f = tp.final_objective().unwrap();
                let ep = relative_recovery_error(&xp, &x).unwrap();
                if best_cd.map_or(true, |(bf, _)| f < bf) {
                    best_cd = Some((f, ep));
                }
            }
            (best_l1.unwrap().1, best_cd.unwrap().1)
        })
        .collect();
    let l1_ok = errs.iter().filter(|e| e.0 < 1e-2).count();
    let cd_ok = errs.iter().filter(|e| e.1 < 1e-2).count();
    assert!(l1_ok >= 30, "l1-ccd recovered only {l1_ok}/50");
    assert!(cd_ok <= 5, "plain ccd recovered {cd_ok}/50, expected near-total failure");
    report(
        7,
        "sparse recovery separation",
        format!("l1-ccd {l1_ok}/50 vs plain ccd {cd_ok}/50"),
    );
}

/// 08: cyclic and random CD touch exactly M ensemble rows per iteration,
/// independent of N.
#[test]
fn a08_per_iteration_row_touches() {
    let m = 96;
    for n in [16usize, 32, 64] {
        let cfg = GenConfig { n, m, k: None, snr_db: None, seed: 700 + n as u64 };
        let (ensemble, _) = gen_instance(&cfg).unwrap();
        let x0 = gen_signal(n, 3 * n as u64);
        for variant in [Variant::Cyclic, Variant::Random] {
            let cd = SolverConfig { variant, seed: 7, ..Default::default() };
            let mut solver = phasecd::CdSolver::new(&ensemble, &x0, cd).unwrap();
            solver.state_mut().reset_row_touches();
            for _ in 0..5 {
                solver.cycle().unwrap();
            }
            let touches = solver.state().row_touches();
            let iters = solver.iterations();
            assert_eq!(
                touches,
                iters * m as u64,
                "{variant:?} at n={n}: {touches} touches over {iters} iterations"
            );
        }
    }
    report(8, "per-iteration row touches", format!("== M = {m} at N in {{16,32,64}}"));
}

/// 09: blind equalization of the dispersive FIR test channel with P=16 taps,
/// 2000 QPSK symbols at 25 dB: averaged over 20 trials, CCD's final ISI is at
/// least 10 dB below the center-tap initialization, and on every seed its ISI
/// is within 1 dB of (in practice well below) the line-search gradient
/// baseline.
#[test]
fn a09_blind_equalization() {
    let channel = ChannelModel::from_real(&default_channel_taps()).unwrap();
    let runs: Vec<(f64, f64, f64)> = (0..20u64)
        .into_par_iter()
        .map(|trial| {
            let seed = derive_seed(999, &[trial]);
            let mk = |solver| EqConfig {
                n_symbols: 2000,
                p: 16,
                snr_db: Some(25.0),
                solver,
                init: EqInit::CenterTap,
                seed,
            };
            let (w_cd, t_cd) = phasecd::equalizer::equalize_run(
                &channel,
                &mk(EqSolver::Cd(SolverConfig { seed, ..Default::default() })),
            )
            .unwrap();
            let (w_wf, _) = phasecd::equalizer::equalize_run(
                &channel,
                &mk(EqSolver::Wf(WfConfig::default())),
            )
            .unwrap();
            let init_isi = t_cd.records.first().unwrap().isi.unwrap();
            let cd_isi = phasecd::equalizer::isi(&channel, &w_cd).unwrap();
            let wf_isi = phasecd::equalizer::isi(&channel, &w_wf).unwrap();
            (init_isi, cd_isi, wf_isi)
        })
        .collect();
    let mean = |f: &dyn Fn(&(f64, f64, f64)) -> f64| {
        runs.iter().map(|r| f(r)).sum::<f64>() / runs.len() as f64
    };
    let init_mean = mean(&|r| r.0);
    let cd_mean = mean(&|r| r.1);
    let improvement_db = 10.0 * (init_mean / cd_mean).log10();
    assert!(improvement_db >= 10.0, "mean ISI improved only {improvement_db:.2} dB");
    for (trial, (_, cd, wf)) in runs.iter().enumerate() {
        let gap_db = 10.0 * (cd / wf).log10();
        assert!(gap_db <= 1.0, "trial {trial}: CD ISI {gap_db:.2} dB above the baseline");
    }
    report(
        9,
        "blind equalization",
        format!(
            "mean ISI {:.2e} ({improvement_db:.1} dB below init), baseline {:.2e}",
            cd_mean,
            mean(&|r| r.2)
        ),
    );
}

/// 10: every converged noiseless run is stationary:
/// ||grad f(xhat)||_inf <= 1e-4 * max(1, f(x0)/||b||).
#[test]
fn a10_stationarity_at_convergence() {
    let worst: Vec<(f64, f64)> = (0..10u64)
        .into_par_iter()
        .map(|trial| {
            let seed = derive_seed(333, &[trial]);
            let cfg = GenConfig { n: 32, m: 192, k: None, snr_db: None, seed };
            let (ensemble, _) = gen_instance(&cfg).unwrap();
            let x0 = spectral_init(&ensemble, &SpectralConfig { seed, ..Default::default() })
                .unwrap();
            let f0 = objective(&ensemble, &embed(&x0)).unwrap();
            let bnorm = ensemble
                .intensities()
                .iter()
                .map(|b| b * b)
                .sum::<f64>()
                .sqrt();
            let bound = 1e-4 * (f0 / bnorm).max(1.0);
            let mut worst_ginf = 0.0f64;
            for variant in [Variant::Cyclic, Variant::Random, Variant::Greedy] {
                let cd = SolverConfig {
                    variant,
                    seed,
                    tol: Some(1e-16 * f0.max(1.0)),
                    max_cycles: 5000,
                    ..Default::default()
                };
                let (xh, _) = phasecd::cd_run(&ensemble, &x0, &cd).unwrap();
                let g = gradient(&ensemble, &embed(&xh)).unwrap();
                worst_ginf = worst_ginf.max(g.iter().fold(0.0f64, |a, v| a.max(v.abs())));
            }
            (worst_ginf, bound)
        })
        .collect();
    for (trial, &(ginf, bound)) in worst.iter().enumerate() {
        assert!(ginf <= bound, "trial {trial}: |grad|_inf {ginf:.3e} > bound {bound:.3e}");
    }
    let max_ratio = worst.iter().fold(0.0f64, |a, &(g, b)| a.max(g / b));
    report(
        10,
        "stationarity at convergence",
        format!("worst |grad|_inf / bound = {max_ratio:.2e}"),
    );
}
