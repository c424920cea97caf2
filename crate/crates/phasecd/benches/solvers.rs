//! Per-solver cost on a fixed instance: one CD cycle vs. one full-gradient
//! iteration, and complete runs to convergence.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use phasecd::measurement::{gen_instance, GenConfig};
use phasecd::spectral::{spectral_init, SpectralConfig};
use phasecd::wf::{wf_run, WfConfig, WfPolicy};
use phasecd::{cd_run, Complex, MeasurementEnsemble, SolverConfig, Variant};

fn instance(n: usize) -> (MeasurementEnsemble, Vec<Complex>) {
    let cfg = GenConfig {
        n,
        m: 6 * n,
        k: None,
        snr_db: None,
        seed: 3,
    };
    let (ensemble, _) = gen_instance(&cfg).unwrap();
    let x0 = spectral_init(&ensemble, &SpectralConfig::default()).unwrap();
    (ensemble, x0)
}

fn single_cycle(c: &mut Criterion) {
    let mut group = c.benchmark_group("one_cycle");
    for n in [32usize, 64] {
        let (ensemble, x0) = instance(n);
        for variant in [Variant::Cyclic, Variant::Random, Variant::Greedy] {
            group.bench_with_input(
                BenchmarkId::new(format!("{variant:?}"), n),
                &(&ensemble, &x0),
                |b, (ensemble, x0)| {
                    b.iter(|| {
                        let config = SolverConfig {
                            variant,
                            max_cycles: 1,
                            tol: Some(f64::MAX),
                            ..Default::default()
                        };
                        cd_run(ensemble, x0, &config).unwrap()
                    })
                },
            );
        }
        group.bench_with_input(
            BenchmarkId::new("WfLineSearch", n),
            &(&ensemble, &x0),
            |b, (ensemble, x0)| {
                b.iter(|| {
                    let config = WfConfig {
                        policy: WfPolicy::ExactLineSearch,
                        max_iters: 1,
                        tol: Some(f64::MAX),
                        ..Default::default()
                    };
                    wf_run(ensemble, x0, &config).unwrap()
                })
            },
        );
    }
    group.finish();
}

fn full_run(c: &mut Criterion) {
    let mut group = c.benchmark_group("to_convergence");
    group.sample_size(10);
    let (ensemble, x0) = instance(32);
    for variant in [Variant::Cyclic, Variant::Random, Variant::Greedy] {
        group.bench_with_input(
            BenchmarkId::new(format!("{variant:?}"), 32),
            &(&ensemble, &x0),
            |b, (ensemble, x0)| {
                b.iter(|| {
                    let config = SolverConfig {
                        variant,
                        ..Default::default()
                    };
                    cd_run(ensemble, x0, &config).unwrap()
                })
            },
        );
    }
    group.bench_with_input(
        BenchmarkId::new("WfLineSearch", 32),
        &(&ensemble, &x0),
        |b, (ensemble, x0)| {
            b.iter(|| wf_run(ensemble, x0, &WfConfig::default()).unwrap())
        },
    );
    group.finish();
}

criterion_group!(benches, single_cycle, full_run);
criterion_main!(benches);
