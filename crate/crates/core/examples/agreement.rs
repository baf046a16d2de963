//! Compares two annotators' knowledge bases concept by concept.

use chrono::{NaiveDate, TimeZone, Utc};
use opinion_kb::agreement::{agreement_table, render_table};
use opinion_kb::kb::{Annotator, SCHEMA_VERSION};
use opinion_kb::schema::{AcosQuad, Sentiment, SentimentPolarity, SsaTuple};
use opinion_kb::{KbEntry, OpinionRecord};

fn entry(doc: &str, who: &str, opinions: Vec<OpinionRecord>) -> KbEntry {
    KbEntry {
        doc_id: doc.into(),
        date: NaiveDate::from_ymd_opt(2024, 1, 2).unwrap(),
        text: format!("text of {doc}"),
        data_model: opinions[0].data_model(),
        annotator: Annotator {
            model_name: who.into(),
            shots: 5,
            cot: false,
        },
        opinions,
        warnings: vec![],
        schema_version: SCHEMA_VERSION.into(),
        created_at: Utc.with_ymd_and_hms(2024, 1, 3, 0, 0, 0).unwrap(),
    }
}

fn ssa(holder: &str, target: &str, polarity: SentimentPolarity) -> OpinionRecord {
    OpinionRecord::Ssa(SsaTuple {
        holder: Some(holder.into()),
        target: Some(target.into()),
        sentiment: Sentiment::new(polarity),
    })
}

fn acos(aspect: &str, attribute: &str, polarity: SentimentPolarity) -> OpinionRecord {
    OpinionRecord::Acos(AcosQuad {
        aspect_term: Some(aspect.into()),
        category_entity: "laptop".into(),
        category_attribute: attribute.into(),
        opinion_span: None,
        polarity,
    })
}

fn main() {
    use SentimentPolarity::*;
    let a = vec![
        entry("s1", "annotator-a", vec![ssa("voters", "the tax cut", Positive)]),
        entry("s2", "annotator-a", vec![ssa("the senator", "the bill", Negative)]),
        entry("r1", "annotator-a", vec![acos("screen", "design_features", Positive)]),
    ];
    let b = vec![
        entry("s1", "annotator-b", vec![ssa("voters", "tax cut", Positive)]),
        entry("s2", "annotator-b", vec![ssa("the senator", "the bill", Neutral)]),
        entry("r1", "annotator-b", vec![acos("screen", "quality", Positive)]),
    ];
    let report = agreement_table("demo", &a, &b);
    print!("{}", render_table(&[report.clone()]));
    for w in &report.warnings {
        println!("warning: {w}");
    }
}
