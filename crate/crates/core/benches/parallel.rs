use std::hint::black_box;

use continua::cantor::build_f_star;
use continua::continuum::{build_g_star, build_y};
use continua::par::Execution;
use continua::rational::rat;
use continua::shadowing::{estimate_shadowing_modulus_with, validate_global_delta, ModulusConfig, Window};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn modulus(c: &mut Criterion) {
    let f = build_f_star(3);
    let eps = rat(1, 8);
    let mut group = c.benchmark_group("shadowing_modulus");
    group.sample_size(10);
    for (name, exec) in MODES {
        let cfg = ModulusConfig {
            exec,
            ..ModulusConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| estimate_shadowing_modulus_with(black_box(&f), &eps, 64, 7, cfg).unwrap())
        });
    }
    group.finish();
}

fn model_orbits(c: &mut Criterion) {
    let y = build_y(4).unwrap();
    let g = build_g_star(&y, 3);
    let (delta, eps) = (rat(1, 4096), rat(1, 10));
    let mut group = c.benchmark_group("model_orbits");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| validate_global_delta(&y, &g, black_box(&delta), &eps, 64, Window::forward(20), 7, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, modulus, model_orbits);
criterion_main!(benches);
