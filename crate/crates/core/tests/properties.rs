use std::sync::Arc;

use kmono::boolfn::{alternating_number, decompose_k_alternating, markov_negations, random_function};
use kmono::combinatorics::{binomial, rank_colex, slice_points, unrank_colex};
use kmono::estimator::{sample_size, ExampleStream};
use kmono::io::{parse_function_file, read_table, table_to_bytes};
use kmono::learner::{
    l1_distance, l2_distance_sq, round_by_threshold, slice_disagreement, theta_averaged_disagreement,
    theta_averaged_disagreement_pointwise, Hypothesis,
};
use kmono::oracle::{brute_expand_slice, chi_b_direct, cube_expand};
use kmono::slice_basis::{chi_b, top_sets_up_to};
use kmono::slice_fourier::{
    expand, expand_to_degree, level_weights, parseval_exact, restrict, spectral_influence, total_influence,
    weight_above,
};
use kmono::{BooleanFunction, SliceFunction, SliceIndex};
use num::{BigRational, One};
use proptest::prelude::*;

fn slice_function() -> impl Strategy<Value = SliceFunction> {
    (1u32..=8)
        .prop_flat_map(|n| (Just(n), 0..=n))
        .prop_flat_map(|(n, r)| {
            let s = SliceIndex::new(n, r).unwrap();
            proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], s.size() as usize)
                .prop_map(move |v| SliceFunction::new(s, v).unwrap())
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn colex_rank_inverts_unrank(n in 1u32..=20, r in 0u32..=20, seed in any::<u64>()) {
        let r = r.min(n);
        let size = binomial(n, r) as u64;
        let rank = seed % size;
        let x = unrank_colex(n, r, rank);
        prop_assert_eq!(x.count_ones(), r);
        prop_assert_eq!(rank_colex(x), rank);
    }

    #[test]
    fn parseval_is_exact(g in slice_function()) {
        prop_assert_eq!(parseval_exact(&g).unwrap(), BigRational::one());
    }

    #[test]
    fn fast_expansion_matches_gram_solve(g in slice_function()) {
        let fast = expand(&g).unwrap();
        let slow = brute_expand_slice(&g).unwrap();
        prop_assert_eq!(fast.terms.len(), slow.terms.len());
        for t in &slow.terms {
            let c = fast.coefficient(&t.top_set).unwrap();
            prop_assert!((c - t.coeff).abs() < 1e-9);
        }
    }

    #[test]
    fn expansion_reconstructs(g in slice_function()) {
        let e = expand(&g).unwrap();
        for (v, w) in g.values().iter().zip(e.reconstruct()) {
            prop_assert!((*v as f64 - w).abs() < 1e-9);
        }
    }

    #[test]
    fn truncation_error_is_high_weight(g in slice_function(), d in 0u32..=4) {
        let e = expand(&g).unwrap();
        let gd = expand_to_degree(&g, d).unwrap().reconstruct();
        prop_assert!((l2_distance_sq(&g, &gd) - weight_above(&e, d)).abs() < 1e-9);
        let low: f64 = level_weights(&expand_to_degree(&g, d).unwrap()).iter().sum();
        prop_assert!((low + weight_above(&e, d) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn influence_identity(g in slice_function()) {
        let e = expand(&g).unwrap();
        prop_assert!((total_influence(&g) - spectral_influence(&e)).abs() < 1e-9);
    }

    #[test]
    fn theta_average_routes_agree_and_obey_the_bound(g in slice_function(), d in 0u32..=4) {
        let gv = expand_to_degree(&g, d).unwrap().reconstruct();
        let sweep = theta_averaged_disagreement(&g, &gv).unwrap();
        let point = theta_averaged_disagreement_pointwise(&g, &gv);
        prop_assert!((sweep - point).abs() < 1e-12);
        prop_assert!(sweep <= l1_distance(&g, &gv) / 2.0 + 1e-12);
    }

    #[test]
    fn rounding_at_zero_of_own_values_is_identity(g in slice_function()) {
        let vals: Vec<f64> = g.values().iter().map(|&v| v as f64).collect();
        let h = round_by_threshold(g.slice(), &vals, 0.0).unwrap();
        prop_assert_eq!(slice_disagreement(&g, &h), 0.0);
    }

    #[test]
    fn decomposition_reproduces_f(n in 1u32..=9, seed in any::<u64>()) {
        let f = random_function(n, seed).unwrap();
        let k = decompose_k_alternating(&f).unwrap();
        prop_assert_eq!(k.combined(), &f);
        prop_assert!(k.parts().iter().all(BooleanFunction::is_monotone));
        prop_assert_eq!(k.k(), alternating_number(&f) as usize);
        if f.constant_value().is_none() {
            prop_assert_eq!(markov_negations(&f).unwrap().alternating_number, k.k() as u32);
        }
    }

    #[test]
    fn cube_transform_is_orthonormal(n in 0u32..=10, seed in any::<u64>()) {
        let f = random_function(n, seed).unwrap();
        let e = cube_expand(&f).unwrap();
        prop_assert!((e.parseval() - 1.0).abs() < 1e-12);
        prop_assert_eq!(e.to_function().unwrap(), f);
    }

    #[test]
    fn table_format_round_trips(n in 0u32..=12, seed in any::<u64>()) {
        let f = random_function(n, seed).unwrap();
        let bytes = table_to_bytes(&f);
        prop_assert_eq!(read_table(&mut bytes.as_slice()).unwrap(), f.clone());
        let parsed = parse_function_file(&bytes).unwrap();
        prop_assert_eq!(parsed.function(), &f);
    }

    #[test]
    fn sample_size_is_monotone(eps in 0.01f64..1.0, delta in 0.001f64..0.5) {
        let m = sample_size(eps, delta, -1.0, 1.0).unwrap();
        prop_assert!(sample_size(eps / 2.0, delta, -1.0, 1.0).unwrap() >= m);
        prop_assert!(sample_size(eps, delta / 2.0, -1.0, 1.0).unwrap() >= m);
        prop_assert!(sample_size(eps, delta, -2.0, 2.0).unwrap() >= m);
    }
}

#[test]
fn product_chi_matches_definition_on_every_point() {
    for n in 1..=7u32 {
        for b in top_sets_up_to(n, n / 2).unwrap() {
            for x in 0..1u64 << n {
                assert_eq!(chi_b(&b, x), chi_b_direct(n, b.entries(), x) as i128);
            }
        }
    }
}

#[test]
fn slice_points_are_colex_ordered() {
    let pts = slice_points(9, 4);
    assert_eq!(pts.len(), 126);
    for (i, &x) in pts.iter().enumerate() {
        assert_eq!(rank_colex(x), i as u64);
    }
}

#[test]
fn restriction_of_majority_is_constant_off_the_middle() {
    let f = BooleanFunction::majority(7).unwrap();
    for r in 0..=7 {
        let g = restrict(&f, r).unwrap();
        let expected = if r >= 4 { -1 } else { 1 };
        assert!(g.values().iter().all(|&v| v == expected));
    }
}

#[test]
fn fallback_hypothesis_survives_json() {
    let h = Hypothesis::fallback(6);
    let back = Hypothesis::from_json(&h.to_json().unwrap()).unwrap();
    assert_eq!(back, h);
    assert!((0..64).all(|x| back.eval(x) == 1));
}

#[test]
fn streams_with_equal_seeds_agree() {
    let f = Arc::new(random_function(8, 3).unwrap());
    let mut a = ExampleStream::from_table(f.clone(), 11);
    let mut b = ExampleStream::from_table(f, 11);
    for _ in 0..500 {
        assert_eq!(a.next_example().unwrap(), b.next_example().unwrap());
    }
}
