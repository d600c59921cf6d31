use amnv::exec::Exec;
use amnv::generate::{gen_random, GenConfig};
use amnv::propagate::enforce_hac_atmost_with;
use amnv::solve::{brute_force_with, min_values};
use amnv::{kernelize, Instance};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn batch(count: usize, n: usize, d: usize, k: usize) -> Vec<Instance> {
    (0..count as u64)
        .map(|seed| gen_random(&GenConfig::new(n, d, k, (n / 3).max(1) as i64, seed)).unwrap())
        .collect()
}

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn kernel_batch(c: &mut Criterion) {
    let insts = batch(64, 2000, 2000, 6);
    let mut g = c.benchmark_group("kernelize_batch");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| exec.map(&insts, |i| kernelize(i).holes()))
        });
    }
    g.finish();
}

fn hac(c: &mut Criterion) {
    let base = gen_random(&GenConfig::new(200, 120, 6, 40, 3)).unwrap();
    // A tight budget forces the per-value checks.
    let inst = base.with_budget(min_values(&base) as i64).unwrap();
    let mut g = c.benchmark_group("hac_atmost");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| enforce_hac_atmost_with(&inst, exec)));
    }
    g.finish();
}

fn brute(c: &mut Criterion) {
    let base = gen_random(&GenConfig::new(20, 40, 16, 5, 11)).unwrap();
    // One below the optimum; every interval choice is tried.
    let inst = base.with_budget(min_values(&base) as i64 - 1).unwrap();
    let mut g = c.benchmark_group("brute_force");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| brute_force_with(&inst, exec)));
    }
    g.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = kernel_batch, hac, brute
}
criterion_main!(benches);
