use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use skspec_core::analysis::CovarianceKernel;
use skspec_core::dynamics::{solve_model, InitialData, Model, ModelConfig};
use skspec_core::noise::{advance_convolutions, sample_path, ConvolutionState, SupportModes};
use skspec_core::propagators::{combined_symbol, mode_transition, ModeSymbolQuery};
use skspec_core::renorm::{sigma_variance, wick_power};
use skspec_core::FrequencyLattice;

fn symbols(c: &mut Criterion) {
    c.bench_function("combined_symbol", |b| {
        b.iter(|| combined_symbol(black_box(ModeSymbolQuery::from_bracket_sq(0.05, 37.0, 0.5))))
    });
    c.bench_function("mode_transition", |b| {
        b.iter(|| mode_transition(black_box(0.1), black_box(145.0), 1e-3))
    });
}

fn convolution(c: &mut Criterion) {
    let lattice = FrequencyLattice::new(256).unwrap();
    let path = sample_path(1, lattice, 0.25, 100).unwrap();
    let modes = Arc::new(SupportModes::new(32.0).unwrap());
    c.bench_function("convolution_step_n32", |b| {
        b.iter(|| {
            let mut st = [ConvolutionState::with_modes(0.1, modes.clone(), &path).unwrap()];
            advance_convolutions(&mut st, &path, 0).unwrap();
            black_box(st[0].mode((1, 0)))
        })
    });
}

fn wick(c: &mut Criterion) {
    let lattice = FrequencyLattice::new(128).unwrap();
    let path = sample_path(3, lattice, 1.0, 1).unwrap();
    let mut st = [ConvolutionState::new(0.0, 16.0, &path).unwrap()];
    advance_convolutions(&mut st, &path, 0).unwrap();
    let psi = st[0].field(lattice).unwrap();
    let sigma = sigma_variance(0.0, 16.0, 1.0).unwrap();
    c.bench_function("wick_cube_n16", |b| {
        b.iter(|| wick_power(black_box(&psi), 3, sigma).unwrap())
    });
}

fn covariance(c: &mut Criterion) {
    let k = CovarianceKernel::gamma(0.0, 64.0, 0.1).unwrap();
    c.bench_function("covariance_eval_n64", |b| {
        b.iter(|| k.eval(black_box((0.3, 0.2))))
    });
}

fn solver(c: &mut Criterion) {
    let cfg = ModelConfig {
        model: Model::Polynomial { k: 3 },
        eps: vec![0.1, 0.0],
        cutoff: 8.0,
        lattice: 64,
        horizon: 0.05,
        steps: 20,
        initial: InitialData::Zero,
        seed: 7,
        record_every: 20,
    };
    let mut group = c.benchmark_group("solver");
    group.sample_size(10);
    group.bench_function("cubic_n8_k20", |b| {
        b.iter(|| solve_model(black_box(&cfg)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, symbols, convolution, wick, covariance, solver);
criterion_main!(benches);
