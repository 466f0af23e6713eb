// Parallel scan against a sequential baseline.
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fibavg::scanner::{is_fib_hit, odd_prime_audit, scan, Kind};

const SIZES: [u64; 2] = [20_000, 200_000];

fn sequential(hi: u64) -> Vec<u64> {
    (1..=hi).filter(|&n| is_fib_hit(n)).collect()
}

fn bench_scan(c: &mut Criterion) {
    let mut group = c.benchmark_group("scan");
    group.sample_size(10);
    for hi in SIZES {
        group.bench_with_input(BenchmarkId::new("sequential", hi), &hi, |b, &hi| {
            b.iter(|| black_box(sequential(hi)))
        });
        group.bench_with_input(BenchmarkId::new("chunked", hi), &hi, |b, &hi| {
            b.iter(|| black_box(scan(Kind::Fib, 1, hi).unwrap()))
        });
        #[cfg(feature = "parallel")]
        {
            let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
            group.bench_with_input(BenchmarkId::new("chunked_1_thread", hi), &hi, |b, &hi| {
                b.iter(|| one.install(|| black_box(scan(Kind::Fib, 1, hi).unwrap())))
            });
        }
    }
    group.finish();
}

fn bench_audit(c: &mut Criterion) {
    let mut group = c.benchmark_group("odd_prime_audit");
    group.sample_size(10);
    group.bench_function("1e6", |b| b.iter(|| black_box(odd_prime_audit(1_000_000))));
    #[cfg(feature = "parallel")]
    {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        group.bench_function("1e6_1_thread", |b| {
            b.iter(|| one.install(|| black_box(odd_prime_audit(1_000_000))))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_scan, bench_audit);
criterion_main!(benches);
