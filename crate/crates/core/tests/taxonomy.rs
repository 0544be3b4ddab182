use std::collections::BTreeSet;

use iconix_core::backend::mock::MockKnowledgeBase;
use iconix_core::backend::RelationProvider;
use iconix_core::ideation::Concept;
use iconix_core::scaffold::{
    build_scaffold, classify_relation, conceptnet_relation, Dimension, KnowledgeSource, RelationKind,
    SemanticRelation, View,
};
use proptest::prelude::*;

const TAXONOMIC: [&str; 5] = ["hypernym", "hyponym", "synonym", "kind_of", "instance_of"];
const CONSTITUTIVE: [&str; 2] = ["part_of", "attribute_of"];
const ASSOCIATIVE: [&str; 5] = ["used_for", "at_location", "related_to", "symbol_of", "similar_to"];

fn name(kind: RelationKind) -> String {
    serde_json::to_value(kind).unwrap().as_str().unwrap().to_string()
}

#[test]
fn all_twelve_kinds_land_in_their_lists() {
    assert_eq!(RelationKind::ALL.len(), 12);
    let distinct: BTreeSet<_> = RelationKind::ALL.iter().collect();
    assert_eq!(distinct.len(), 12);
    let mut deviations = Vec::new();
    for kind in RelationKind::ALL {
        let n = name(kind);
        let expected = if TAXONOMIC.contains(&n.as_str()) {
            Dimension::Taxonomic
        } else if CONSTITUTIVE.contains(&n.as_str()) {
            Dimension::Constitutive
        } else if ASSOCIATIVE.contains(&n.as_str()) {
            Dimension::Associative
        } else {
            panic!("{n} is in no list");
        };
        if classify_relation(kind) != expected {
            deviations.push(n);
        }
    }
    assert!(deviations.is_empty(), "{deviations:?}");
    let listed: BTreeSet<&str> = TAXONOMIC.iter().chain(&CONSTITUTIVE).chain(&ASSOCIATIVE).copied().collect();
    let names: BTreeSet<String> = RelationKind::ALL.iter().map(|&k| name(k)).collect();
    assert_eq!(names, listed.iter().map(|s| s.to_string()).collect());
}

#[test]
fn views_map_onto_dimensions_and_levels() {
    assert_eq!(View::CHAIN, [View::Comparative, View::Microscopic, View::Macroscopic]);
    let levels: Vec<u8> = View::CHAIN.iter().map(|v| v.semantic_level()).collect();
    assert_eq!(levels, [1, 2, 3]);
    let dims: Vec<Dimension> = View::CHAIN.iter().map(|v| v.dimension()).collect();
    assert_eq!(dims, [Dimension::Taxonomic, Dimension::Constitutive, Dimension::Associative]);
    for v in View::CHAIN {
        assert_eq!(View::from_semantic_level(v.semantic_level()), Some(v));
        assert_eq!(View::parse(v.as_str()), Some(v));
    }
}

#[test]
fn conceptnet_relations_map_into_the_taxonomy() {
    assert_eq!(conceptnet_relation("/r/IsA"), Some(RelationKind::KindOf));
    assert_eq!(conceptnet_relation("/r/PartOf"), Some(RelationKind::PartOf));
    assert_eq!(conceptnet_relation("/r/UsedFor"), Some(RelationKind::UsedFor));
    assert_eq!(conceptnet_relation("/r/AtLocation"), Some(RelationKind::AtLocation));
    assert_eq!(conceptnet_relation("/r/Antonym"), None);
    assert_eq!(conceptnet_relation("/r/ExternalURL"), None);
}

#[test]
fn hamburger_scaffold_fills_all_buckets() {
    let center = Concept::user("hamburger").unwrap();
    let relations = MockKnowledgeBase.relations(&center).unwrap();
    let scaffold = build_scaffold(center, relations).unwrap();
    for dim in [Dimension::Taxonomic, Dimension::Constitutive, Dimension::Associative] {
        let bucket = scaffold.bucket(dim);
        assert!(!bucket.is_empty(), "{dim:?}");
        assert!(bucket.iter().all(|r| classify_relation(r.relation) == dim));
    }
    let parts: Vec<&str> = scaffold.bucket(Dimension::Constitutive).iter().map(|r| r.object.as_str()).collect();
    assert!(parts.contains(&"bun") && parts.contains(&"patty"), "{parts:?}");
}

fn arb_relation() -> impl Strategy<Value = SemanticRelation> {
    (0usize..12, "[a-e]{1,2}", 0.0f64..10.0)
        .prop_map(|(k, obj, w)| SemanticRelation::new("center", RelationKind::ALL[k], &obj, KnowledgeSource::ConceptNet, w))
}

proptest! {
    #[test]
    fn scaffold_buckets_are_consistent(relations in prop::collection::vec(arb_relation(), 0..60)) {
        let scaffold = build_scaffold(Concept::user("center").unwrap(), relations).unwrap();
        for dim in [Dimension::Taxonomic, Dimension::Constitutive, Dimension::Associative] {
            let bucket = scaffold.bucket(dim);
            prop_assert!(bucket.len() <= iconix_core::scaffold::BUCKET_CAP);
            let mut keys = BTreeSet::new();
            for r in bucket {
                prop_assert_eq!(classify_relation(r.relation), dim);
                prop_assert!(keys.insert((r.relation, r.object.clone())), "duplicate {:?}", r);
            }
        }
    }
}
