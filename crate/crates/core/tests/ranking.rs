use std::cmp::Ordering;
use std::time::Instant;

use iconix_core::ideation::{
    aggregate_rank, filter_constraints, rank_pool, threshold_filter, AttributeScores, CandidateEntry, Category,
    Concept,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CATEGORIES: [Category; 4] = [
    Category::ConcreteObject,
    Category::AbstractNoun,
    Category::SuperordinateCategory,
    Category::IntangibleAction,
];

fn entry(label: &str, c: u8, f: u8, i: u8, m: u8, category: Category) -> CandidateEntry {
    CandidateEntry::new(
        Concept::user(label).unwrap(),
        String::new(),
        AttributeScores::new(c, f, i, m).unwrap(),
        category,
    )
}

/// 40 candidates, labels unique, scores uniform on each native scale,
/// concrete objects over-represented so the ranked list is non-trivial.
fn random_pool(seed: u64) -> Vec<CandidateEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..40)
        .map(|n| {
            let category = if rng.random_bool(0.6) {
                Category::ConcreteObject
            } else {
                CATEGORIES[rng.random_range(1..4)]
            };
            entry(
                &format!("cand{:02}-{}", n, rng.random_range(0..1000)),
                rng.random_range(1..=5),
                rng.random_range(1..=7),
                rng.random_range(1..=7),
                rng.random_range(1..=9),
                category,
            )
        })
        .collect()
}

/// Mean of the four min-max normalized scores, scaled by 4·4·6·6·8 so the
/// comparison is exact.
fn oracle_score(e: &CandidateEntry) -> i64 {
    let s = e.scores();
    let n = |v: u8, span: i64, scale: i64| (v as i64 - 1) * scale / span;
    let denom = 4 * 6 * 6 * 8;
    n(s.concreteness(), 4, denom) + n(s.familiarity(), 6, denom) + n(s.imageability(), 6, denom) + n(s.meaningfulness(), 8, denom)
}

fn oracle_rank(pool: &[CandidateEntry]) -> Vec<String> {
    let mut kept: Vec<&CandidateEntry> = Vec::new();
    for e in pool {
        let s = e.scores();
        let concrete = matches!(e.category(), Category::ConcreteObject);
        let passes = s.concreteness() > 3 && s.familiarity() > 4 && s.imageability() > 4 && s.meaningfulness() > 5;
        if concrete && passes {
            kept.push(e);
        }
    }
    // Insertion sort: deliberately unlike the library's sort.
    let mut out: Vec<&CandidateEntry> = Vec::new();
    for e in kept {
        let pos = out
            .iter()
            .position(|o| match oracle_score(e).cmp(&oracle_score(o)) {
                Ordering::Greater => true,
                Ordering::Equal => e.label() < o.label(),
                Ordering::Less => false,
            })
            .unwrap_or(out.len());
        out.insert(pos, e);
    }
    out.into_iter().map(|e| e.label().to_string()).collect()
}

fn labels(pool: &[CandidateEntry]) -> Vec<String> {
    pool.iter().map(|e| e.label().to_string()).collect()
}

#[test]
fn forty_candidate_pools_match_the_oracle() {
    let started = Instant::now();
    for seed in 0..50 {
        let pool = random_pool(seed);
        assert_eq!(labels(&rank_pool(pool.clone())), oracle_rank(&pool), "seed {seed}");
    }
    assert!(started.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn thresholds_at_every_boundary_combination() {
    // Each attribute either sits exactly on its threshold or one below.
    for bits in 0u8..16 {
        let at = |bit: u8, threshold: u8| if bits & (1 << bit) != 0 { threshold } else { threshold - 1 };
        let (c, f, i, m) = (at(0, 4), at(1, 5), at(2, 5), at(3, 6));
        let e = entry("probe", c, f, i, m, Category::ConcreteObject);
        let expected = bits == 0b1111;
        assert_eq!(e.scores().passes_thresholds(), expected, "{c} {f} {i} {m}");
        assert_eq!(threshold_filter(vec![e]).len(), expected as usize);
    }
    // The eight combinations with C on its boundary and F, I, M toggled.
    for bits in 0u8..8 {
        let at = |bit: u8, threshold: u8| if bits & (1 << bit) != 0 { threshold } else { threshold - 1 };
        let e = entry("probe", 4, at(0, 5), at(1, 5), at(2, 6), Category::ConcreteObject);
        assert_eq!(e.scores().passes_thresholds(), bits == 0b111);
    }
}

#[test]
fn aggregate_is_equal_weight_normalized_mean() {
    let e = entry("max", 5, 7, 7, 9, Category::ConcreteObject);
    assert_eq!(e.aggregate(), 1.0);
    let e = entry("min", 1, 1, 1, 1, Category::ConcreteObject);
    assert_eq!(e.aggregate(), 0.0);
    // 0.5 + 0.5 + 0.5 + 0.5 over four.
    let e = entry("mid", 3, 4, 4, 5, Category::ConcreteObject);
    assert_eq!(e.aggregate(), 0.5);
}

#[test]
fn ties_break_by_label() {
    let pool = vec![
        entry("b", 4, 5, 5, 6, Category::ConcreteObject),
        entry("a", 4, 5, 5, 6, Category::ConcreteObject),
        entry("c", 5, 5, 5, 6, Category::ConcreteObject),
    ];
    assert_eq!(labels(&rank_pool(pool)), ["c", "a", "b"]);
}

fn arb_entry() -> impl Strategy<Value = CandidateEntry> {
    ("[a-z]{1,6}", 1u8..=5, 1u8..=7, 1u8..=7, 1u8..=9, 0usize..4)
        .prop_map(|(l, c, f, i, m, k)| entry(&l, c, f, i, m, CATEGORIES[k]))
}

proptest! {
    #[test]
    fn filters_are_idempotent(pool in prop::collection::vec(arb_entry(), 0..40)) {
        let once = filter_constraints(pool.clone());
        prop_assert_eq!(filter_constraints(once.clone()), once);
        let once = threshold_filter(pool);
        prop_assert_eq!(threshold_filter(once.clone()), once);
    }

    #[test]
    fn ranking_is_a_sorted_permutation(pool in prop::collection::vec(arb_entry(), 0..40)) {
        let ranked = aggregate_rank(pool.clone());
        let mut a = labels(&pool);
        let mut b = labels(&ranked);
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
        for w in ranked.windows(2) {
            prop_assert!(w[0].aggregate() >= w[1].aggregate());
        }
    }

    #[test]
    fn rank_order_survives_affine_renormalization(
        pool in prop::collection::vec(arb_entry(), 0..40),
        scale in 1i64..50,
        shift in -100i64..100,
    ) {
        // The same positive affine map on every normalized attribute maps
        // the aggregate through that map too, so the order cannot change.
        let ranked = labels(&aggregate_rank(pool.clone()));
        let mut mapped: Vec<(i64, String)> = pool
            .iter()
            .map(|e| (scale * oracle_score(e) + 4 * shift, e.label().to_string()))
            .collect();
        mapped.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        prop_assert_eq!(ranked, mapped.into_iter().map(|(_, l)| l).collect::<Vec<_>>());
    }
}
