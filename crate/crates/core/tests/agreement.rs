mod common;

use proptest::prelude::*;

use common::*;
use opinion_kb::agreement::{agreement_table, render_table, ConceptName};
use opinion_kb::kb::KbEntry;
use opinion_kb::{DataModel, OpinionRecord};

const SSA_ROWS: [ConceptName; 5] = [
    ConceptName::Target,
    ConceptName::HolderSpan,
    ConceptName::SentimentPolarity,
    ConceptName::SentimentExpression,
    ConceptName::SentimentIntensity,
];

#[test]
fn golden_three_document_report() {
    let (a, b) = golden_kbs();
    let r = agreement_table("golden", &a, &b);
    let expected = [
        (ConceptName::Target, 33.33),
        (ConceptName::HolderSpan, 80.0),
        (ConceptName::SentimentPolarity, 66.67),
        (ConceptName::SentimentExpression, 66.67),
        (ConceptName::SentimentIntensity, 40.0),
    ];
    for (concept, f1) in expected {
        assert_eq!(r.cell(DataModel::Ssa, concept), Some(f1), "{concept}");
    }
    for concept in ConceptName::ALL {
        if !SSA_ROWS.contains(&concept) {
            assert_eq!(r.cell(DataModel::Ssa, concept), None, "{concept}");
        }
        assert_eq!(r.cell(DataModel::Acos, concept), None);
        assert_eq!(r.cell(DataModel::Uoc, concept), None);
    }
    let table = render_table(&[r]);
    let golden = std::fs::read_to_string(fixture("agreement_golden.txt")).unwrap();
    assert_eq!(table, golden);
}

#[test]
fn dash_pattern_follows_concept_maps() {
    let mut a = Vec::new();
    for (name, model) in [("ssa_docs.jsonl", DataModel::Ssa), ("acos_docs.jsonl", DataModel::Acos), ("uoc_docs.jsonl", DataModel::Uoc)] {
        for d in load(name) {
            let mut e = entry(&d.id, "m", d.opinions);
            e.data_model = model;
            a.push(e);
        }
    }
    let r = agreement_table("fixtures", &a, &a);
    for model in DataModel::ALL.iter().copied() {
        for concept in ConceptName::ALL {
            let applies = model.schema().has_concept(concept);
            assert_eq!(r.cell(model, concept).is_some(), applies, "{model} {concept}");
            if applies {
                assert_eq!(r.cell(model, concept), Some(100.0), "{model} {concept}");
            }
        }
    }
    let ssa: Vec<_> = ConceptName::ALL.into_iter().filter(|c| DataModel::Ssa.schema().has_concept(*c)).collect();
    let mut expected = SSA_ROWS.to_vec();
    expected.sort();
    let mut got = ssa;
    got.sort();
    assert_eq!(got, expected);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn swapping_annotators_is_symmetric(
        (model, docs_a, docs_b) in arb_model().prop_flat_map(|m| (
            Just(m),
            prop::collection::vec(arb_opinions(m, 3), 1..5),
            prop::collection::vec(arb_opinions(m, 3), 1..5),
        ))
    ) {
        let mk = |docs: &[Vec<OpinionRecord>], who: &str| -> Vec<KbEntry> {
            docs.iter().enumerate().map(|(i, ops)| {
                let mut e = entry(&format!("d{i}"), who, ops.clone());
                e.data_model = model;
                e
            }).collect()
        };
        let a = mk(&docs_a, "a");
        let b = mk(&docs_b, "b");
        let ab = agreement_table("x", &a, &b);
        let ba = agreement_table("x", &b, &a);
        for (x, y) in ab.cells.iter().zip(&ba.cells) {
            prop_assert_eq!(x.f1_pct, y.f1_pct);
            if let (Some(s), Some(t)) = (x.score, y.score) {
                prop_assert_eq!(s.precision, t.recall);
                prop_assert_eq!(s.recall, t.precision);
            }
        }
        let same = agreement_table("x", &a, &a);
        for c in same.cells.iter().filter(|c| c.data_model == model) {
            if let Some(f) = c.f1_pct {
                prop_assert_eq!(f, 100.0);
            }
        }
    }
}
