use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use hybrid_ntt::dataflow::mode_schedule;
use hybrid_ntt::fragmentation::audit_layout;
use hybrid_ntt::modmath::{mul_mod, mul_mod_shoup, precompute_shoup};
use hybrid_ntt::poly::{random_polynomial, reference_forward_ntt};
use hybrid_ntt::{map_layout, run_transform, EngineConfig, ModulusContext, Simulator};
use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

const FLOOR: u64 = 1 << 59;

fn modular(c: &mut Criterion) {
    let ctx = ModulusContext::with_prime_floor(1 << 16, FLOOR).unwrap();
    let q = ctx.q();
    let mut rng = SplitMix64::seed_from_u64(1);
    let xs: Vec<u64> = (0..4096).map(|_| rng.next_u64() % q).collect();
    let w = precompute_shoup(rng.next_u64() % q, q).unwrap();

    let mut g = c.benchmark_group("modmul");
    g.throughput(Throughput::Elements(xs.len() as u64));
    g.bench_function("shoup", |b| {
        b.iter(|| {
            xs.iter()
                .fold(0u64, |acc, &x| acc ^ mul_mod_shoup(black_box(x), w, q))
        })
    });
    g.bench_function("u128", |b| {
        b.iter(|| {
            xs.iter()
                .fold(0u64, |acc, &x| acc ^ mul_mod(black_box(x), w.value, q))
        })
    });
    g.finish();
}

fn transforms(c: &mut Criterion) {
    let mut g = c.benchmark_group("forward_ntt");
    g.sample_size(20);
    for log_n in [13u32, 16] {
        let n = 1usize << log_n;
        let ctx = ModulusContext::with_prime_floor(n, FLOOR).unwrap();
        let cfg = EngineConfig::new(n, 256, 16).unwrap();
        let a = random_polynomial(&ctx, &mut SplitMix64::seed_from_u64(log_n as u64));
        g.throughput(Throughput::Elements(n as u64));
        g.bench_with_input(BenchmarkId::new("reference", n), &a, |b, a| {
            b.iter(|| reference_forward_ntt(&ctx, a).unwrap())
        });
        let mut sim = Simulator::new(cfg, &ctx).unwrap();
        g.bench_with_input(BenchmarkId::new("engine", n), &a, |b, a| {
            b.iter(|| sim.run(a, false).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("engine_traced", n), &a, |b, a| {
            b.iter(|| run_transform(a, &cfg, &ctx, true).unwrap())
        });
    }
    g.finish();
}

fn layouts(c: &mut Criterion) {
    let mut g = c.benchmark_group("layout");
    for (n, np, p) in [(1usize << 13, 256usize, 16usize), (1 << 16, 256, 16)] {
        g.bench_function(BenchmarkId::new("map", n), |b| {
            b.iter(|| map_layout(n, np, p).unwrap())
        });
        let layout = map_layout(n, np, p).unwrap();
        let sched = mode_schedule(n, np).unwrap();
        g.bench_function(BenchmarkId::new("audit", n), |b| {
            b.iter(|| audit_layout(&layout, &sched).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, modular, transforms, layouts);
criterion_main!(benches);
