use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use magspec::{
    count_end, discretize, morse_check, weyl_integral, CuspEnd, End, FunnelEnd, ModeOptions, MorseOptions, RadialField,
    SurfaceEnds, WeylOptions,
};

fn funnel() -> End {
    FunnelEnd::new(1.0, 0.0, RadialField::funnel(vec![0.0, 1.0]).unwrap(), 0.0)
        .unwrap()
        .into()
}

fn cusp() -> End {
    CuspEnd::new(1.0, 0.0, RadialField::cusp(vec![0.0, 1.0]).unwrap(), 0.0)
        .unwrap()
        .into()
}

fn sturm(c: &mut Criterion) {
    let op = discretize(|t| t * t, -10.0, 10.0, 10_000).unwrap();
    c.bench_function("sturm count, n = 10000", |b| b.iter(|| op.count_below(black_box(50.0))));
}

fn counts(c: &mut Criterion) {
    let opts = ModeOptions::default();
    let (f, k) = (funnel(), cusp());
    let mut group = c.benchmark_group("count_end");
    group.sample_size(10);
    group.bench_function("cusp y, lambda 400", |b| {
        b.iter(|| count_end(&k, black_box(400.0), &opts).unwrap())
    });
    group.bench_function("funnel cosh, lambda 100", |b| {
        b.iter(|| count_end(&f, black_box(100.0), &opts).unwrap())
    });
    group.finish();
}

fn semiclassical(c: &mut Criterion) {
    let ends = SurfaceEnds::new(vec![funnel(), cusp()]).unwrap();
    let opts = WeylOptions::default();
    c.bench_function("weyl integral, lambda 400", |b| {
        b.iter(|| weyl_integral(&ends, black_box(400.0), &opts).unwrap())
    });
}

fn morse(c: &mut Criterion) {
    let opts = MorseOptions::default();
    let mut group = c.benchmark_group("morse");
    group.sample_size(10);
    group.bench_function("beta 2.5, n 8000", |b| {
        b.iter(|| morse_check(black_box(2.5), &opts).unwrap())
    });
    group.finish();
}

criterion_group!(benches, sturm, counts, semiclassical, morse);
criterion_main!(benches);
