mod common;

use common::*;
use proptest::prelude::*;
use serde_json::json;

use opinion_kb::schema::{leaf_values, normalize, parse_opinion, parse_opinions};
use opinion_kb::{DataModel, OpinionRecord};

proptest! {
    #[test]
    fn serialization_round_trips((model, op) in arb_model().prop_flat_map(|m| (Just(m), arb_opinion(m)))) {
        let back = parse_opinion(&op.to_value(), model.schema()).unwrap();
        prop_assert_eq!(&back, &op);
        let text = serde_json::to_string(&op).unwrap();
        let via_serde: OpinionRecord = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(via_serde, op);
    }

    #[test]
    fn leaf_vector_length_matches_schema((model, gold, _) in arb_instance(4)) {
        for op in &gold {
            prop_assert_eq!(leaf_values(op, model.schema()).unwrap().len(), model.schema().leaf_count());
        }
    }

    #[test]
    fn normalize_is_idempotent(s in "[ a-zA-Z\"'`“”‘’\t]{0,16}") {
        let once = normalize(&s);
        prop_assert_eq!(normalize(&once), once.clone());
        prop_assert_eq!(once.trim(), once.as_str());
        prop_assert!(!once.chars().any(|c| c.is_uppercase()));
    }

    #[test]
    fn leaf_values_are_normalized((model, gold, _) in arb_instance(3)) {
        for op in &gold {
            for v in leaf_values(op, model.schema()).unwrap().into_iter().flatten() {
                prop_assert_eq!(normalize(&v), v);
            }
        }
    }
}

#[test]
fn leaf_counts_per_model() {
    assert_eq!(DataModel::Ssa.schema().leaf_count(), 5);
    assert_eq!(DataModel::Acos.schema().leaf_count(), 5);
    assert_eq!(DataModel::Uoc.schema().leaf_count(), 10);
}

#[test]
fn fixture_instances_validate() {
    for (name, model) in [
        ("ssa_docs.jsonl", DataModel::Ssa),
        ("acos_docs.jsonl", DataModel::Acos),
        ("uoc_docs.jsonl", DataModel::Uoc),
    ] {
        let docs = load(name);
        assert!(!docs.is_empty());
        for d in docs {
            assert_eq!(d.data_model, model);
            for op in &d.opinions {
                op.validate().unwrap();
            }
        }
    }
}

#[test]
fn acos_example_with_implicit_opinion() {
    let v = json!({"sentiment":"Negative","aspect_term":"medical expenses",
                   "aspect_category":{"entity":"healthcare","entity_attribute":"cost"},"opinion_span":null});
    let op = parse_opinion(&v, DataModel::Acos.schema()).unwrap();
    assert_eq!(
        leaf_values(&op, DataModel::Acos.schema()).unwrap(),
        vec![
            Some("medical expenses".to_string()),
            Some("healthcare".to_string()),
            Some("cost".to_string()),
            None,
            Some("negative".to_string()),
        ]
    );
}

#[test]
fn wrong_model_is_rejected() {
    let v = json!({"sentiment":"negative","aspect_term":"x","aspect_category":{"entity":"e","entity_attribute":"a"},"opinion_span":null});
    assert!(parse_opinions(&[v], DataModel::Ssa).is_err());
}
