use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dephasim_core::analytics::{dephasing_law, effective_dephasing_rate, LawParams};
use dephasim_core::bessel::bessel_weights;
use dephasim_core::diffusion::{ka_path, stationary_density, telegraph_path};
use dephasim_core::dynamics::{log_amplitude, solve_full, FullSolverConfig};
use dephasim_core::harness::{estimate, simulate_runs, GridSpec, RunConfig};
use dephasim_core::rng::stream;
use dephasim_core::units::{mhz_to_rad_s, us_to_s};
use dephasim_core::{EngineKind, EnsembleSpec, QubitParams, ShiftPath, SolverConfig, ThermalBathParams, TlsParams};

fn fig2_spec() -> EnsembleSpec {
    let delta = mhz_to_rad_s(0.8);
    let g_max = (delta / us_to_s(20.0)).sqrt();
    let mu = mhz_to_rad_s(5.0);
    EnsembleSpec {
        delta_typ: delta,
        g_max,
        g_min: 1e-3 * g_max,
        band_halfwidth: 5.0 * mu,
        gamma: mhz_to_rad_s(0.5),
        mu_av: mu,
        mu_max: 5.0 * mu,
        r_thermal: 1e3,
    }
}

fn qubit() -> QubitParams {
    QubitParams::unmodulated(mhz_to_rad_s(5000.0))
}

fn diffusion(c: &mut Criterion) {
    let spec = fig2_spec();
    let mut group = c.benchmark_group("diffusion");
    for n in [64usize, 256, 1024] {
        let bath = ThermalBathParams::from_spec(&spec, n);
        group.bench_with_input(BenchmarkId::new("telegraph_path_1ms", n), &bath, |b, bath| {
            let mut r = 0;
            b.iter(|| {
                r += 1;
                telegraph_path(bath, 1e-3, 1e-5, &mut stream(1, r, 0)).unwrap()
            })
        });
    }
    let bath = ThermalBathParams::from_spec(&spec, 256);
    group.bench_function("ka_path_1ms", |b| {
        let mut r = 0;
        b.iter(|| {
            r += 1;
            ka_path(&bath, 1e-3, 5e-5, &mut stream(1, r, 0)).unwrap()
        })
    });
    group.bench_function("stationary_density", |b| {
        b.iter(|| stationary_density(black_box(1.3 * spec.mu_av), &bath).unwrap())
    });
    group.finish();
}

fn dynamics(c: &mut Criterion) {
    let spec = fig2_spec();
    let q = qubit();
    let mut group = c.benchmark_group("dynamics");
    let times: Vec<f64> = (0..=100).map(|k| 1e-6 * k as f64).collect();
    let ensemble: Vec<TlsParams> = (0..32)
        .map(|n| spec.tls(q.e0 + mhz_to_rad_s(0.3 * n as f64 - 5.0), spec.g_max))
        .collect();
    let paths: Vec<ShiftPath> = ensemble
        .iter()
        .enumerate()
        .map(|(n, tls)| {
            let bath = ThermalBathParams::for_tls(tls, spec.r_thermal, 256);
            telegraph_path(&bath, 1e-4, 1e-6, &mut stream(2, 0, n as u32)).unwrap()
        })
        .collect();
    let weights = bessel_weights(0.0, 1e-12);
    group.bench_function("markov_32_tls", |b| {
        b.iter(|| log_amplitude(&ensemble, &paths, &q, &weights, &times).unwrap())
    });
    group.sample_size(10);
    group.bench_function("full_8_tls", |b| {
        b.iter(|| solve_full(&ensemble[..8], &q, &paths[..8], &times, &FullSolverConfig::default()).unwrap())
    });
    group.finish();
}

fn analytics(c: &mut Criterion) {
    let spec = fig2_spec();
    let law = LawParams::from_spec(&spec);
    let mut group = c.benchmark_group("analytics");
    group.bench_function("bessel_weights_x30", |b| b.iter(|| bessel_weights(black_box(30.0), 1e-12)));
    group.bench_function("dephasing_law", |b| b.iter(|| dephasing_law(&law, 0.0, black_box(3e-4)).unwrap()));
    group.bench_function("effective_dephasing_rate", |b| {
        b.iter(|| effective_dephasing_rate(black_box(&law), 0.0).unwrap())
    });
    group.finish();
}

fn harness(c: &mut Criterion) {
    let spec = fig2_spec();
    let q = qubit();
    let cfg = RunConfig {
        n_runs: 100,
        seed: 3,
        grid: GridSpec::linear(1e-4, 101),
        engine: EngineKind::Telegraph,
        n_fluctuators: 256,
        solver: SolverConfig::for_device(&spec, &q),
        ensemble: spec,
        qubit: q,
        resample_ensemble_per_run: false,
    };
    let mut group = c.benchmark_group("harness");
    group.sample_size(10);
    group.bench_function("fig2_100_runs", |b| b.iter(|| simulate_runs(&cfg, Some(1)).unwrap()));
    let logs = simulate_runs(&cfg, Some(1)).unwrap();
    let times = cfg.grid.times().unwrap();
    group.bench_function("estimate_100_runs", |b| b.iter(|| estimate(&times, &logs).unwrap()));
    group.finish();
}

criterion_group!(benches, diffusion, dynamics, analytics, harness);
criterion_main!(benches);
