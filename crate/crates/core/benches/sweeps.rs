use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use squeeze_core::spectra::{self, brute_ddt, brute_lat};
use squeeze_core::templates::{feistel, random_scheme};
use squeeze_core::{BitVector, Dims, Execution, KeyRule, KeyedMap};

const STRATEGIES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn core_tables(c: &mut Criterion) {
    let mut group = c.benchmark_group("core_tables");
    group.sample_size(10);
    for d in [8usize, 10, 12] {
        let map = KeyedMap::random(
            d,
            d,
            KeyRule::XorPre,
            &mut ChaCha8Rng::seed_from_u64(d as u64),
        )
        .unwrap();
        let key = map.prepare_key(&map.zero_key()).unwrap();
        for (name, exec) in STRATEGIES {
            group.bench_with_input(BenchmarkId::new(format!("ddt/{name}"), d), &d, |b, _| {
                b.iter(|| spectra::ddt(&map, &key, 20, exec).unwrap())
            });
            group.bench_with_input(BenchmarkId::new(format!("lat/{name}"), d), &d, |b, _| {
                b.iter(|| spectra::lat(&map, &key, 20, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn brute_round_tables(c: &mut Criterion) {
    let mut group = c.benchmark_group("brute_round_tables");
    group.sample_size(10);
    for n in [3usize, 4] {
        let spec = feistel(n, None, 1).unwrap();
        let key = BitVector::zeros(spec.key_bits());
        for (name, exec) in STRATEGIES {
            group.bench_with_input(
                BenchmarkId::new(format!("ddt/{name}"), 2 * n),
                &n,
                |b, _| b.iter(|| brute_ddt(&spec, &key, 20, exec).unwrap()),
            );
            group.bench_with_input(
                BenchmarkId::new(format!("lat/{name}"), 2 * n),
                &n,
                |b, _| b.iter(|| brute_lat(&spec, &key, 20, exec).unwrap()),
            );
        }
    }
    group.finish();
}

fn inversion_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("inversion_sweep");
    group.sample_size(10);
    for bits in [12usize, 16, 18] {
        let spec = random_scheme(Dims::new(2, bits / 2, 1, 2), 3).unwrap();
        let key = spec
            .prepare_key(&BitVector::zeros(spec.key_bits()))
            .unwrap();
        let round = spec.packed().unwrap();
        for (name, exec) in STRATEGIES {
            group.bench_with_input(BenchmarkId::new(name, bits), &bits, |b, _| {
                b.iter(|| {
                    let bad = exec.sum(1 << bits, |x| {
                        i64::from(round.inverse(round.forward(x, &key), &key) != x)
                    });
                    assert_eq!(bad, 0);
                })
            });
        }
    }
    group.finish();
}

criterion_group!(benches, core_tables, brute_round_tables, inversion_sweep);
criterion_main!(benches);
