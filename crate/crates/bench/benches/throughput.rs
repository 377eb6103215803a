use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sieve_core::asymptotics::psi;
use sieve_core::sieve::chain::{simulate_zero_decrements, KernelSpec};
use sieve_core::sieve::{simulate_sieve_direct, simulate_sieve_thinning};
use sieve_core::{StableSpec, WLaw};

fn sieve(c: &mut Criterion) {
    let mut group = c.benchmark_group("sieve");
    let laws = [
        ("uniform", WLaw::uniform()),
        (
            "comparable",
            WLaw::two_sided_log_pareto(1.0 / 3.0, 0.5, 0.5, 1.0).unwrap(),
        ),
        ("right-log-pareto", WLaw::right_log_pareto(0.5, 1.0).unwrap()),
    ];
    for (name, law) in laws {
        for n in [1_000u64, 1_000_000_000_000] {
            group.bench_with_input(BenchmarkId::new(format!("thinning/{name}"), n), &n, |b, &n| {
                let mut rng = ChaCha8Rng::seed_from_u64(1);
                b.iter(|| simulate_sieve_thinning(&law, n, &mut rng).unwrap());
            });
        }
    }
    let uniform = WLaw::uniform();
    group.bench_function("direct/uniform/10000", |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        b.iter(|| simulate_sieve_direct(&uniform, 10_000, &mut rng).unwrap());
    });
    let kernel = KernelSpec::sieve(&WLaw::beta(2.0, 3.0).unwrap()).unwrap();
    group.bench_function("kernel/beta(2,3)/10000", |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        b.iter(|| simulate_zero_decrements(&kernel, 10_000, &mut rng).unwrap());
    });
    group.finish();
}

fn stable(c: &mut Criterion) {
    let spec = StableSpec::new(1.5).unwrap();
    c.bench_function("stable/alpha=1.5/1000 draws", |b| {
        b.iter_batched(
            || ChaCha8Rng::seed_from_u64(4),
            |mut rng| (0..1000).map(|_| spec.sample(&mut rng)).sum::<f64>(),
            BatchSize::SmallInput,
        );
    });
}

fn laplace(c: &mut Criterion) {
    let law = WLaw::two_sided_log_pareto(0.5, 1.5, 0.2, 1.0).unwrap();
    c.bench_function("psi/two-sided/1e13", |b| b.iter(|| psi(&law, black_box(1e13)).unwrap()));
}

criterion_group!(benches, sieve, stable, laplace);
criterion_main!(benches);
