use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pdexplain::{quantile_grid, BackgroundSet, FeatureSubset, PdEngine};
use pdexplain_bench::{forest, simulated};

fn fit(c: &mut Criterion) {
    let mut group = c.benchmark_group("forest_fit");
    group.sample_size(10);
    for n in [500, 2000] {
        let (data, _) = simulated(n, 1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &data, |b, data| {
            b.iter(|| forest(black_box(data), 50, 7))
        });
    }
    group.finish();
}

fn pd_at_observations(c: &mut Criterion) {
    let (data, x) = simulated(1000, 2);
    let model = forest(&data, 100, 3);
    let bg = BackgroundSet::subsample(&x, 200, 4).unwrap();
    let subset = FeatureSubset::single(0);
    let mut group = c.benchmark_group("pd_at_observations");
    group.sample_size(10);
    group.bench_function("forest_structure", |b| {
        b.iter(|| {
            PdEngine::default()
                .pd_at_observations(&model, &bg, black_box(&subset))
                .unwrap()
        })
    });
    group.bench_function("generic_rows", |b| {
        b.iter(|| {
            PdEngine::generic()
                .pd_at_observations(&model, &bg, black_box(&subset))
                .unwrap()
        })
    });
    group.finish();
}

fn grid(c: &mut Criterion) {
    let (_, x) = simulated(100_000, 5);
    c.bench_function("quantile_grid_100k", |b| {
        b.iter(|| quantile_grid(black_box(&x), 0, 50).unwrap())
    });
}

criterion_group!(benches, fit, pd_at_observations, grid);
criterion_main!(benches);
