use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use freestat::asymptotics::{frequency_series, CountingStrategy, SeriesKind};
use freestat::predicate::parse_predicate;
use freestat::quotient::{s3_example, sphere_pushforwards};
use freestat::walks::{exact_pushforward, geodesic_length_stats};
use freestat::whitehead::is_primitive;
use freestat::word::{for_each_in_sphere, Rank};
use freestat::ReducedWord;

fn rank(n: usize) -> Rank {
    Rank::new(n).unwrap()
}

fn spheres(c: &mut Criterion) {
    c.bench_function("enumerate F_2 sphere k=12", |b| {
        b.iter(|| {
            let mut count = 0u64;
            for_each_in_sphere(rank(2), black_box(12), None, |_| count += 1);
            count
        })
    });
}

fn transfer_dp(c: &mut Criterion) {
    let p = parse_predicate("commutator", rank(2)).unwrap();
    c.bench_function("commutator disc series dp k=40", |b| {
        b.iter(|| frequency_series(p.as_ref(), rank(2), SeriesKind::Disc, black_box(40), CountingStrategy::Dp).unwrap())
    });
}

fn primitivity(c: &mut Criterion) {
    let words: Vec<ReducedWord> = ["abAbaBBa", "aababab", "abABabAB", "abcACbaBcc"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    c.bench_function("is_primitive rank 3", |b| {
        b.iter(|| words.iter().filter(|w| is_primitive(rank(3), w)).count())
    });
}

fn walks(c: &mut Criterion) {
    c.bench_function("exact pushforward F_2 L=10", |b| {
        b.iter(|| exact_pushforward(rank(2), black_box(10), 1 << 22).unwrap())
    });
    c.bench_function("geodesic stats F_2 L=100 10k trials", |b| {
        b.iter(|| geodesic_length_stats(rank(2), 100, black_box(10_000), 7).unwrap())
    });
}

fn quotients(c: &mut Criterion) {
    let q = s3_example();
    c.bench_function("S3 sphere pushforwards k<=40", |b| b.iter(|| sphere_pushforwards(&q, black_box(40))));
}

criterion_group!(benches, spheres, transfer_dp, primitivity, walks, quotients);
criterion_main!(benches);
