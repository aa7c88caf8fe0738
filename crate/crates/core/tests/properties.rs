use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;
use wcauth_core::bounds::{
    chebyshev_bound, conditional_success, hypergeom_total_mass, weak_pair_prob_exact,
};
use wcauth_core::keyspace::{
    certain_forgery, constraint_set, intersect, partition_by_message, random_elimination,
};
use wcauth_core::protocol::{
    concat_for_tag, monte_carlo, monte_carlo_with_transcripts, trial_rng, Capability, Partition,
    RoundSetup, Scenario,
};
use wcauth_core::{
    BoundParams, CampaignConfig, ChebyshevMode, Epsilon, FamilySpec, HashFamily, KeyIndex, KeySet,
    Strategy as Attack, Variant,
};

const PRIMES: [u64; 6] = [3, 5, 7, 11, 13, 17];

/// A desk-scale parameter set: an affine or binary family size, its natural
/// ε scaled up by `stretch`, and a survivor count.
fn desk_params() -> impl Strategy<Value = BoundParams> {
    let affine = (prop::sample::select(PRIMES.to_vec()), 1u64..=3)
        .prop_map(|(p, k)| (p * p, p, k.min(p), p));
    let binary = (2u32..=6, 1u32..=5, 1u64..=3).prop_filter_map("tag_bits < bits", |(b, t, k)| {
        (t < b).then(|| (1u64 << (2 * b), 1u64 << t, k.min(1 << t), 1u64 << t))
    });
    prop_oneof![affine, binary].prop_flat_map(|(keys, tags, numer, denom)| {
        (1..=keys).prop_map(move |s| {
            BoundParams::from_counts(keys, tags, Epsilon::new(numer, denom).unwrap(), s).unwrap()
        })
    })
}

fn affine_with_knowledge() -> impl Strategy<Value = (HashFamily, Vec<KeyIndex>)> {
    prop::sample::select(vec![3u64, 5, 7, 11]).prop_flat_map(|p| {
        let keys = (p * p) as KeyIndex;
        prop::collection::btree_set(0..keys, 1..=(keys as usize).min(12))
            .prop_map(move |set| (HashFamily::affine(p).unwrap(), set.into_iter().collect()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn pmf_sums_to_one(params in desk_params()) {
        prop_assert_eq!(hypergeom_total_mass(&params).unwrap(), BigRational::one());
    }

    #[test]
    fn chebyshev_dominates_weak_pair(params in desk_params()) {
        let weak = weak_pair_prob_exact(&params).unwrap();
        if let Ok(bound) = chebyshev_bound(&params, ChebyshevMode::ExactMoments) {
            let bound = bound.exact.unwrap();
            prop_assert!(weak <= bound, "{} > {}", weak, bound);
        }
    }

    #[test]
    fn conditional_success_is_a_probability(params in desk_params(), size in 1u64..5000) {
        if let Ok(e) = conditional_success(&params, size) {
            prop_assert!(e.prob.value() <= 1.0 && e.prob.value() > 0.0);
        }
    }

    #[test]
    fn certain_forgery_is_sound(
        (f, keys) in affine_with_knowledge(),
        m in 0u64..11,
    ) {
        let m = m % f.num_messages();
        let set = KeySet::from_indices(&f, keys.iter().copied()).unwrap();
        let tags: Vec<_> = keys.iter().map(|&k| f.eval(k, m).unwrap()).collect();
        match certain_forgery(&f, &set, m).unwrap() {
            Some(t) => prop_assert!(tags.iter().all(|&x| x == t)),
            None => prop_assert!(tags.iter().any(|&x| x != tags[0])),
        }
    }

    #[test]
    fn partition_covers_knowledge(
        (f, keys) in affine_with_knowledge(),
        m in 0u64..11,
    ) {
        let m = m % f.num_messages();
        let set = KeySet::from_indices(&f, keys.iter().copied()).unwrap();
        let profile = partition_by_message(&f, &set, m).unwrap();
        prop_assert_eq!(profile.subset_sizes.values().sum::<u64>(), set.len());
        for t in &profile.good_subsets {
            prop_assert!(f.admits_good(profile.subset_sizes[t]));
        }
        for (&t, &n) in &profile.subset_sizes {
            let class = constraint_set(&f, m, t).unwrap();
            prop_assert_eq!(intersect(&set, &class).unwrap().len(), n);
        }
    }

    #[test]
    fn intersection_is_a_commutative_subset(
        (f, a) in affine_with_knowledge(),
        b in prop::collection::vec(0u32..121, 0..20),
    ) {
        let b: Vec<_> = b.into_iter().filter(|&k| (k as u64) < f.num_keys()).collect();
        let a = KeySet::from_indices(&f, a).unwrap();
        let b = KeySet::from_indices(&f, b).unwrap();
        let ab = intersect(&a, &b).unwrap();
        prop_assert_eq!(&ab, &intersect(&b, &a).unwrap());
        prop_assert!(ab.iter().all(|k| a.contains(k) && b.contains(k)));
    }

    #[test]
    fn concat_is_injective(
        m1 in 0u64..1 << 10, s1 in 0u64..1 << 6,
        m2 in 0u64..1 << 10, s2 in 0u64..1 << 6,
    ) {
        let x = concat_for_tag(m1, s1, 10, 6).unwrap();
        let y = concat_for_tag(m2, s2, 10, 6).unwrap();
        prop_assert_eq!(x == y, (m1, s1) == (m2, s2));
    }

    #[test]
    fn elimination_keeps_true_key(p in prop::sample::select(PRIMES.to_vec()), k in 0u32..289, r in 0.05f64..=1.0, seed: u64) {
        let f = HashFamily::affine(p).unwrap();
        let k = k % f.num_keys() as u32;
        let set = random_elimination(&f, k, r, &mut trial_rng(seed, 0)).unwrap();
        prop_assert!(set.contains(k));
        prop_assert_eq!(set.len(), wcauth_core::keyspace::surviving_count(f.num_keys(), r).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn campaigns_are_deterministic(seed: u64, salted: bool) {
        let (family, variant) = if salted {
            (FamilySpec::Binary { bits: 5, tag_bits: 2, epsilon: None }, Variant::Salted { salt_bits: None })
        } else {
            (FamilySpec::Affine { p: 7, epsilon: None }, Variant::Plain)
        };
        let cfg = CampaignConfig {
            family,
            variant,
            strategy: Attack::BlindGuess,
            r: 0.5,
            trials: 200,
            master_seed: seed,
            noise: 0.0,
            message_influence: true,
        };
        let a = monte_carlo(&cfg).unwrap();
        let (b, transcripts) = monte_carlo_with_transcripts(&cfg).unwrap();
        prop_assert_eq!(&a, &b);
        let (_, again) = monte_carlo_with_transcripts(&cfg).unwrap();
        prop_assert_eq!(transcripts, again);
    }

    #[test]
    fn salted_rounds_respect_commitment(seed: u64, engineered: bool) {
        let strategy = if engineered {
            Attack::Engineered { partition: Partition::Searched, capability: Capability::Concrete }
        } else {
            Attack::BlindGuess
        };
        let cfg = CampaignConfig {
            family: FamilySpec::Binary { bits: 5, tag_bits: 2, epsilon: None },
            variant: Variant::Salted { salt_bits: None },
            strategy,
            r: 0.25,
            trials: 50,
            master_seed: seed,
            noise: 0.0,
            message_influence: true,
        };
        let (_, transcripts) = monte_carlo_with_transcripts(&cfg).unwrap();
        prop_assert!(transcripts.iter().all(|t| t.respects_commitment()));
    }

    #[test]
    fn concrete_interception_is_never_detected(
        (f, mut keys) in affine_with_knowledge(),
        true_pick in any::<prop::sample::Index>(),
        m in 0u64..11,
        seed: u64,
    ) {
        keys.sort_unstable();
        let true_key = keys[true_pick.index(keys.len())];
        let m = m % f.num_messages();
        let knowledge = KeySet::from_indices(&f, keys).unwrap();
        let s = Scenario::new(
            f,
            Variant::Plain,
            Attack::InterceptCertain { capability: Capability::Concrete },
            0.5,
            0.0,
            true,
        )
        .unwrap();
        let setup = RoundSetup { true_key, knowledge, alice_message: m, designed_salt: None };
        let (_, o) = s.play(setup, &mut trial_rng(seed, 0), false).unwrap();
        prop_assert!(!o.eve_detected);
        prop_assert_eq!(o.eve_attempted, o.forgery_accepted);
    }
}
