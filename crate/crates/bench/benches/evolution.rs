//! Time-stepping costs: single splitting steps and whole period maps.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use parasol_bench::{bump, demo_period_map, demo_problem, line_grid};
use parasol_core::evolution::{Integrator, Scheme};

fn evolution(c: &mut Criterion) {
    let mut group = c.benchmark_group("evolution");
    for points in [256usize, 1024] {
        let grid = line_grid(points);
        let nl = demo_problem(&grid);
        let integrator = Integrator::physical(&nl, 1.0, Scheme::Strang).unwrap();
        let u = bump(&grid);
        group.bench_with_input(BenchmarkId::new("strang-step", points), &u, |b, u| {
            b.iter(|| integrator.step(u, 0.0, 1e-2).unwrap())
        });
    }
    let grid = line_grid(256);
    let map = demo_period_map(&grid, 256);
    let u = bump(&grid);
    group.bench_function("period-map-256", |b| b.iter(|| map.apply(&u).unwrap()));
    group.finish();
}

criterion_group!(benches, evolution);
criterion_main!(benches);
