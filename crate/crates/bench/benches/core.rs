use std::collections::BTreeSet;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use wcauth_core::bounds::{chebyshev_bound, weak_pair_prob_exact};
use wcauth_core::keyspace::{craft_influenced_message, partition_by_message, random_elimination};
use wcauth_core::protocol::{trial_rng, Capability, Partition};
use wcauth_core::{
    monte_carlo, verify_asu2, BoundParams, CampaignConfig, ChebyshevMode, Epsilon, FamilySpec,
    HashFamily, Strategy, Variant,
};

fn families(c: &mut Criterion) {
    let affine = HashFamily::affine(31).unwrap();
    c.bench_function("verify_asu2 affine 31", |b| {
        b.iter(|| verify_asu2(black_box(&affine)).unwrap())
    });
    let binary = HashFamily::binary(5, 3).unwrap();
    c.bench_function("verify_asu2 binary 5:3", |b| {
        b.iter(|| verify_asu2(black_box(&binary)).unwrap())
    });
}

fn bounds(c: &mut Criterion) {
    let desk = BoundParams::from_counts(1 << 14, 32, Epsilon::new(1, 32).unwrap(), 600).unwrap();
    c.bench_function("weak_pair_prob_exact 2^14 keys", |b| {
        b.iter(|| weak_pair_prob_exact(black_box(&desk)).unwrap())
    });
    let large = BoundParams::new(
        2176.0,
        32.0,
        Epsilon::new(1, 1 << 31).unwrap(),
        (-0.125f64).exp2(),
    )
    .unwrap();
    c.bench_function("chebyshev asymptotic 2^2176 keys", |b| {
        b.iter(|| chebyshev_bound(black_box(&large), ChebyshevMode::Asymptotic).unwrap())
    });
}

fn keyspace(c: &mut Criterion) {
    let f = HashFamily::binary(6, 4).unwrap();
    let knowledge = random_elimination(&f, 17, 0.25, &mut trial_rng(1, 0)).unwrap();
    c.bench_function("partition_by_message 1024 of 4096 keys", |b| {
        b.iter(|| partition_by_message(&f, black_box(&knowledge), 5).unwrap())
    });
    let small = HashFamily::binary(5, 3).unwrap();
    let knowledge = random_elimination(&small, 3, 0.1, &mut trial_rng(2, 0)).unwrap();
    let exclude = BTreeSet::new();
    c.bench_function("craft_influenced_message 102 of 1024 keys", |b| {
        b.iter(|| craft_influenced_message(&small, black_box(&knowledge), &exclude).unwrap())
    });
}

fn campaigns(c: &mut Criterion) {
    let mut group = c.benchmark_group("monte_carlo 10^4 trials");
    group.sample_size(10);
    for (name, variant, strategy) in [
        (
            "plain intercept",
            Variant::Plain,
            Strategy::InterceptCertain {
                capability: Capability::Oracle,
            },
        ),
        (
            "plain engineered",
            Variant::Plain,
            Strategy::Engineered {
                partition: Partition::Idealized,
                capability: Capability::Oracle,
            },
        ),
        (
            "salted engineered",
            Variant::Salted { salt_bits: None },
            Strategy::Engineered {
                partition: Partition::Idealized,
                capability: Capability::Oracle,
            },
        ),
    ] {
        let cfg = CampaignConfig {
            family: FamilySpec::Binary {
                bits: 6,
                tag_bits: 4,
                epsilon: Some(Epsilon::new(1, 8).unwrap()),
            },
            variant,
            strategy,
            r: 0.75,
            trials: 10_000,
            master_seed: 9,
            noise: 0.0,
            message_influence: true,
        };
        group.bench_function(name, |b| b.iter(|| monte_carlo(black_box(&cfg)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, families, bounds, keyspace, campaigns);
criterion_main!(benches);
