use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use orthospec_core::special::{gamma_fn, Dimension};
use orthospec_core::{
    cusp_integral_quadrature, f3_closed, fn_numeric, generate_strip_packing, partial_orthospectrum, CuspIntegralKind,
    PackingConfig,
};

fn special(c: &mut Criterion) {
    c.bench_function("gamma_fn 7.5", |b| b.iter(|| gamma_fn(black_box(7.5))));
    c.bench_function("f3_closed 1.0", |b| b.iter(|| f3_closed(black_box(1.0))));
}

fn quadrature(c: &mut Criterion) {
    let mut g = c.benchmark_group("cusp quadrature n=4 d=1");
    for kind in [CuspIntegralKind::Main, CuspIntegralKind::I1, CuspIntegralKind::Harmonic(3)] {
        g.bench_with_input(BenchmarkId::from_parameter(kind), &kind, |b, &kind| {
            b.iter(|| cusp_integral_quadrature(kind, Dimension::new(4).unwrap(), 1.0, 1e-10))
        });
    }
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let mut g = c.benchmark_group("fn_numeric 10^5 samples");
    g.sample_size(10);
    for n in [3, 4] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| fn_numeric(Dimension::new(n).unwrap(), 1.0, 100_000, 1))
        });
    }
    g.finish();
}

fn apollonian(c: &mut Criterion) {
    let mut g = c.benchmark_group("strip packing");
    g.sample_size(20);
    for k in [100u64, 1000] {
        let cfg = PackingConfig::with_bound(k);
        g.bench_with_input(BenchmarkId::new("generate", k), &cfg, |b, cfg| b.iter(|| generate_strip_packing(cfg)));
        let packing = generate_strip_packing(&cfg).unwrap();
        g.bench_with_input(BenchmarkId::new("orthospectrum", k), &cfg, |b, cfg| {
            b.iter(|| partial_orthospectrum(&packing, cfg))
        });
    }
    g.finish();
}

criterion_group!(benches, special, quadrature, monte_carlo, apollonian);
criterion_main!(benches);
