//! Builds one opinion per data model, validates it and prints its canonical
//! form and flattened leaf components.

use opinion_kb::schema::{
    leaf_values, AcosQuad, Sentiment, SentimentIntensity, SentimentPolarity, SsaTuple, UocOpinion,
};
use opinion_kb::OpinionRecord;

fn main() {
    let opinions = [
        OpinionRecord::Ssa(SsaTuple {
            holder: Some("John McCain".into()),
            target: Some("bankruptcy protections".into()),
            sentiment: Sentiment {
                polarity: SentimentPolarity::Negative,
                expression: Some("opposed".into()),
                intensity: Some(SentimentIntensity::Average),
            },
        }),
        OpinionRecord::Acos(AcosQuad {
            aspect_term: Some("battery".into()),
            category_entity: "battery".into(),
            category_attribute: "quality".into(),
            opinion_span: None,
            polarity: SentimentPolarity::Positive,
        }),
        OpinionRecord::Uoc(UocOpinion {
            entity: "AAPL".into(),
            holder_span: None,
            holder_entity: Some("author".into()),
            aspect_term: None,
            aspect_category: "stock price".into(),
            sentiment: Sentiment::new(SentimentPolarity::Positive),
            reason: Some("earnings beat".into()),
            qualifier: None,
        }),
    ];
    for op in &opinions {
        op.validate().expect("valid opinion");
        let schema = op.data_model().schema();
        println!("{} ({} leaves)", op.data_model().label(), schema.leaf_count());
        println!("  {}", op.to_value());
        for (leaf, value) in schema.leaf_components.iter().zip(leaf_values(op, schema).unwrap()) {
            println!("  {:<28} {}", leaf.name, value.as_deref().unwrap_or("null"));
        }
    }
}
