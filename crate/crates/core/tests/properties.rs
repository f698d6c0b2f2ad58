use std::sync::Arc;

use proptest::prelude::*;

use freestat::asymptotics::{frequency_series, growth_rate};
use freestat::measure::{degree_of_growth, SphereAverage};
use freestat::predicate::{
    count_in_sphere, AllWords, EvenLength, FirstLetterIn, FnPredicate, IntegerKernel, Primitive, QuotientFiber, Union,
};
use freestat::quotient::{simple_walk_step, sphere_pushforward, sphere_pushforward_counts, WalkOperator};
use freestat::walks::{exact_pushforward, geodesic_length_stats, relabel, DEFAULT_STATE_CAP};
use freestat::whitehead::{count_primitives, PrimitiveStrategy};
use freestat::word::{for_each_in_sphere, sphere_size_u128};
use freestat::{
    is_primitive, AtomicMeasure, CountingStrategy, Density, DensitySpec, FiniteQuotient, GroupDistribution, Letter,
    Rank, ReducedWord, SeriesKind, SetPredicate,
};

fn rank(n: usize) -> Rank {
    Rank::new(n).unwrap()
}

fn letter(rank: usize) -> impl Strategy<Value = Letter> {
    (0..rank, any::<bool>()).prop_map(|(g, inv)| Letter::new(g, inv))
}

fn word(rank: usize, max: usize) -> impl Strategy<Value = ReducedWord> {
    prop::collection::vec(letter(rank), 0..max).prop_map(|ls| {
        let mut w = ReducedWord::identity();
        for l in ls {
            w.push(l);
        }
        w
    })
}

fn density_spec() -> impl Strategy<Value = DensitySpec> {
    prop_oneof![
        (0.05f64..30.0).prop_map(|lambda| DensitySpec::Poisson { lambda }),
        (0.02f64..5.0).prop_map(|lambda| DensitySpec::Exponential { lambda }),
        (-10.0f64..40.0, 0.1f64..20.0).prop_map(|(a, sigma)| DensitySpec::Gauss { a, sigma }),
        (0.0f64..8.0).prop_map(|m| DensitySpec::Dirac { m: m as usize }),
        (0usize..10, 1usize..4).prop_map(|(m, n)| DensitySpec::DiscUniform { m, rank: Some(n) }),
    ]
}

/// Image of `w` under the endomorphism sending generator `i` to `images[i]`.
fn substitute(w: &ReducedWord, images: &[ReducedWord]) -> ReducedWord {
    w.letters().iter().fold(ReducedWord::identity(), |acc, l| {
        let img = &images[l.generator()];
        acc.multiply(&if l.is_inverse() { img.inverse() } else { img.clone() })
    })
}

/// A random product of elementary Nielsen moves on `F_2`, as generator images.
fn nielsen(moves: &[u8]) -> Vec<ReducedWord> {
    let a = ReducedWord::generator(0);
    let b = ReducedWord::generator(1);
    let mut images = vec![a, b];
    for &m in moves {
        images = match m % 4 {
            0 => vec![images[0].multiply(&images[1]), images[1].clone()],
            1 => vec![images[0].clone(), images[1].multiply(&images[0])],
            2 => vec![images[1].clone(), images[0].clone()],
            _ => vec![images[0].inverse(), images[1].clone()],
        };
    }
    images
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn densities_are_normalized(spec in density_spec()) {
        let d = Density::new(spec).unwrap();
        let cut = 600;
        let head: f64 = (0..cut).map(|k| d.eval(k)).sum();
        prop_assert!((head + d.tail_mass(cut) - 1.0).abs() < 1e-9);
        let tails: Vec<f64> = (0..cut).map(|l| d.tail_mass(l)).collect();
        prop_assert!(tails.windows(2).all(|w| w[1] <= w[0] + 1e-15));
    }

    #[test]
    fn point_mass_depends_only_on_length(u in word(3, 8), v in word(3, 8), lambda in 0.1f64..2.0) {
        let m = AtomicMeasure::word_length(rank(3), Density::new(DensitySpec::Exponential { lambda }).unwrap());
        if u.len() == v.len() {
            prop_assert_eq!(m.point_mass(&u), m.point_mass(&v));
        }
        let d = m.density();
        let expected = d.eval(u.len()) / freestat::word::sphere_size_f64(rank(3), u.len());
        prop_assert!((m.point_mass(&u) - expected).abs() <= 1e-15 * expected.max(1e-300));
    }

    #[test]
    fn set_measure_is_additive(split in 1usize..4, lambda in 0.2f64..2.0) {
        // Non-trivial words split by first letter into two disjoint sets.
        let letters: Vec<Letter> = rank(2).letters().collect();
        let s = FirstLetterIn::new(letters[..split].to_vec());
        let t = FirstLetterIn::new(letters[split..].to_vec());
        let m = AtomicMeasure::word_length(rank(2), Density::new(DensitySpec::Exponential { lambda }).unwrap());
        let ms = m.set_measure(&s, 30).unwrap().value;
        let mt = m.set_measure(&t, 30).unwrap().value;
        let union = Union(vec![Box::new(s), Box::new(t)]);
        let mu = m.set_measure_exhaustive(&union, 12, 1e7).unwrap().value;
        let mu12s = m.set_measure_exhaustive(&FirstLetterIn::new(letters[..split].to_vec()), 12, 1e7).unwrap().value;
        let mu12t = m.set_measure_exhaustive(&FirstLetterIn::new(letters[split..].to_vec()), 12, 1e7).unwrap().value;
        prop_assert!((mu - (mu12s + mu12t)).abs() < 1e-15);
        // Monotone: S is inside all non-trivial words.
        let all = m.set_measure(&AllWords, 30).unwrap().value;
        prop_assert!(ms <= all && mt <= all);
    }

    #[test]
    fn dp_matches_enumeration_for_integer_kernels(wa in -2i64..3, wb in -2i64..3) {
        let s = IntegerKernel::new(vec![wa, wb]);
        let dp = s.sphere_counts(rank(2), 9).unwrap().unwrap();
        for (k, &c) in dp.iter().enumerate() {
            prop_assert_eq!(c, count_in_sphere(&s, rank(2), k));
        }
    }

    #[test]
    fn quotient_kernels_match_pushforward(
        pa in Just(vec![0u32, 1, 2, 3]).prop_shuffle(),
        pb in Just(vec![0u32, 1, 2, 3]).prop_shuffle(),
    ) {
        let q = Arc::new(FiniteQuotient::from_permutations(rank(2), &[pa, pb], "q").unwrap());
        let kernel = QuotientFiber::kernel(q.clone());
        let freqs = kernel.sphere_frequencies(rank(2), 8).unwrap().unwrap();
        for (k, freq) in freqs.iter().enumerate() {
            let counts = sphere_pushforward_counts(&q, k).unwrap();
            prop_assert_eq!(counts.iter().sum::<u128>(), sphere_size_u128(rank(2), k).unwrap());
            prop_assert_eq!(counts[0], count_in_sphere(&kernel, rank(2), k));
            prop_assert!((sphere_pushforward(&q, k).masses()[0] - freq).abs() < 1e-12);
        }
    }

    #[test]
    fn simple_walk_contracts_to_uniform(
        pa in Just(vec![0u32, 1, 2, 3, 4]).prop_shuffle(),
        pb in Just(vec![0u32, 1, 2, 3, 4]).prop_shuffle(),
    ) {
        let q = FiniteQuotient::from_permutations(rank(2), &[pa, pb], "q").unwrap();
        let u = GroupDistribution::uniform(q.order());
        let tu = simple_walk_step(&q, &u);
        prop_assert!(tu.masses().iter().zip(u.masses()).all(|(x, y)| (x - y).abs() <= 1e-12));
        let tvs: Vec<f64> = WalkOperator::Simple.trajectory(&q, 40).iter().map(|p| p.tv_to_uniform()).collect();
        prop_assert!(tvs.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn automorphic_images_of_generators_are_primitive(moves in prop::collection::vec(any::<u8>(), 0..10), w in word(2, 6)) {
        let images = nielsen(&moves);
        let p = substitute(&ReducedWord::generator(0), &images);
        prop_assert!(is_primitive(rank(2), &p));
        prop_assert!(is_primitive(rank(2), &p.conjugate_by(&w)));
        prop_assert!(is_primitive(rank(2), &p.inverse()));
    }

    #[test]
    fn primitive_words_have_primitive_abelian_images(w in word(2, 10)) {
        // Independent necessary condition: a primitive element maps to a
        // primitive vector of Z^2.
        let e = w.abelianize(rank(2));
        if is_primitive(rank(2), &w) {
            prop_assert_eq!(gcd(e.exponents()[0], e.exponents()[1]), 1);
        }
        let cyc = w.conjugate_by(&ReducedWord::generator(1));
        prop_assert_eq!(is_primitive(rank(2), &w), is_primitive(rank(2), &cyc));
    }

    #[test]
    fn pushforward_keeps_parity_and_symmetry(len in 0usize..8, swap in any::<bool>()) {
        let t = exact_pushforward(rank(2), len, DEFAULT_STATE_CAP).unwrap();
        prop_assert!((t.total_mass() - 1.0).abs() < 1e-12);
        let map = move |l: Letter| if swap { Letter::new(1 - l.generator(), l.is_inverse()) } else { l.inverse() };
        for &(ref w, c) in &t.counts {
            prop_assert_eq!(w.len() % 2, len % 2);
            prop_assert_eq!(t.mass(&relabel(w, map)), c as f64 / t.total as f64);
        }
    }
}

#[test]
fn identity_mass_after_two_steps() {
    for n in [2, 3, 4] {
        let t = exact_pushforward(rank(n), 2, DEFAULT_STATE_CAP).unwrap();
        assert_eq!(t.mass(&ReducedWord::identity()), 1.0 / (2 * n) as f64);
    }
}

#[test]
fn monte_carlo_frequencies_within_four_sigma() {
    let kernel = IntegerKernel::new(vec![1, 0]);
    let sets: [&dyn SetPredicate; 3] = [&EvenLength, &freestat::predicate::DerivedSubgroup, &kernel];
    for s in sets {
        let exact = frequency_series(s, rank(2), SeriesKind::Spherical, 10, CountingStrategy::Dp).unwrap();
        let mc = frequency_series(s, rank(2), SeriesKind::Spherical, 10, CountingStrategy::MonteCarlo { samples: 20_000, seed: 5 })
            .unwrap();
        for (e, m) in exact.points.iter().zip(&mc.points) {
            let sigma = (e.ratio * (1.0 - e.ratio) / 20_000.0).sqrt();
            assert!((e.ratio - m.ratio).abs() <= 4.0 * sigma + 1e-12, "{} k={}: {} vs {}", s.name(), e.k, e.ratio, m.ratio);
        }
    }
}

#[test]
fn geodesic_mean_agrees_with_exact_law() {
    let t = exact_pushforward(rank(2), 12, DEFAULT_STATE_CAP).unwrap();
    let exact: f64 = t.length_marginal().iter().enumerate().map(|(k, &c)| k as f64 * c as f64).sum::<f64>() / t.total as f64;
    let mc = geodesic_length_stats(rank(2), 12, 100_000, 21).unwrap();
    assert!((mc.mean - exact).abs() <= 4.0 * mc.stderr, "{} vs {exact}", mc.mean);
}

#[test]
fn growth_rate_is_at_most_one() {
    let all = growth_rate(&AllWords, rank(2), 20, CountingStrategy::Dp).unwrap();
    assert!((all.estimate - 1.0).abs() < 1e-12);
    let kernel = IntegerKernel::new(vec![1, 1]);
    for s in [&EvenLength as &dyn SetPredicate, &freestat::predicate::DerivedSubgroup, &kernel] {
        assert!(growth_rate(s, rank(2), 30, CountingStrategy::Dp).unwrap().estimate <= 1.0 + 1e-12);
    }
}

#[test]
fn degree_estimate_is_stable_when_range_doubles() {
    for m in 0..=3 {
        let f = move |w: &ReducedWord| (w.len() as f64).powi(m);
        let short = degree_of_growth(&f, rank(2), 4, 8, SphereAverage::Exhaustive).unwrap().alpha;
        let long = degree_of_growth(&f, rank(2), 4, 16, SphereAverage::Sampled { samples: 50, seed: 1 }).unwrap().alpha;
        assert!((short - long).abs() < 0.05);
    }
    // A function that is not a pure power of the length.
    let f = |w: &ReducedWord| w.letters().iter().filter(|l| l.generator() == 0).count() as f64;
    let short = degree_of_growth(&f, rank(2), 4, 7, SphereAverage::Exhaustive).unwrap().alpha;
    let long = degree_of_growth(&f, rank(2), 4, 14, SphereAverage::Exhaustive).unwrap().alpha;
    assert!((short - 1.0).abs() < 0.1 && (short - long).abs() < 0.05, "{short} {long}");
}

#[test]
fn primitive_density_falls_along_each_parity() {
    // The rank-2 primitive density is not monotone in k (odd spheres are
    // richer than the even ones before them), but each parity class falls.
    let ratios: Vec<f64> =
        (2..=10).map(|k| count_primitives(rank(2), k, PrimitiveStrategy::Exhaustive).unwrap().ratio).collect();
    assert!(ratios[1] > ratios[0]);
    for parity in 0..2 {
        let sub: Vec<f64> = ratios.iter().skip(parity).step_by(2).copied().collect();
        assert!(sub.windows(2).all(|w| w[1] < w[0]), "{sub:?}");
    }
}

#[test]
fn two_generator_bound_is_attained_at_length_one() {
    // P(2,1) = 4 = (4/√3)·√3 exactly; every longer length is strictly above.
    assert_eq!(count_primitives(rank(2), 1, PrimitiveStrategy::Exhaustive).unwrap().count, 4);
    for k in 2..=10 {
        let row = count_primitives(rank(2), k, PrimitiveStrategy::Exhaustive).unwrap();
        assert_eq!(row.exceeds_two_generator_bound(), Some(true), "k={k}");
    }
}

#[test]
fn primitive_predicate_agrees_with_counts() {
    let p = Primitive::new(rank(3));
    for k in 1..=4 {
        assert_eq!(count_in_sphere(&p, rank(3), k), count_primitives(rank(3), k, PrimitiveStrategy::Exhaustive).unwrap().count);
    }
    // Every primitive of rank three maps onto a primitive vector of Z^3.
    let nonprimitive_images = FnPredicate::new("bad", |w: &ReducedWord| {
        let e = w.abelianize(rank(3));
        let g = e.exponents().iter().fold(0, |g, &x| gcd(g, x));
        is_primitive(rank(3), w) && g != 1
    });
    for k in 1..=5 {
        let mut hits = 0;
        for_each_in_sphere(rank(3), k, None, |w| hits += usize::from(nonprimitive_images.contains(w)));
        assert_eq!(hits, 0);
    }
}
