use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use elevate_bench::{fusion_chain, wide_match, COMBINATORS, MAP_FUSION_APPLIED, ST_RULES};
use elevate_core::eval::eval;
use elevate_core::pipeline::check_source;
use elevate_core::syntax::parse;

fn stages(c: &mut Criterion) {
    c.bench_function("parse combinators", |b| {
        b.iter(|| parse(black_box(COMBINATORS)).unwrap())
    });
    c.bench_function("check combinators", |b| {
        b.iter(|| check_source(black_box(COMBINATORS)).unwrap())
    });
    for (name, src) in [("map fusion", MAP_FUSION_APPLIED), ("st rules", ST_RULES)] {
        let term = check_source(src).unwrap().runnable().unwrap();
        c.bench_function(&format!("eval {name}"), |b| b.iter(|| eval(black_box(&term), 100_000)));
    }
}

fn scaling(c: &mut Criterion) {
    let mut g = c.benchmark_group("check fusion chain");
    for n in [1, 2, 4, 8] {
        let src = fusion_chain(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &src, |b, s| {
            b.iter(|| check_source(s).unwrap())
        });
    }
    g.finish();
    let mut g = c.benchmark_group("check wide match");
    for n in [4, 16, 64] {
        let src = wide_match(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &src, |b, s| {
            b.iter(|| check_source(s).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, stages, scaling);
criterion_main!(benches);
