//! Scores predicted opinions against gold with component-level overlap and
//! optimal alignment.

use opinion_kb::metric::{align, corpus_metric, ComparePolicy, EvalInstance};
use opinion_kb::schema::{Sentiment, SentimentIntensity, SentimentPolarity, SsaTuple};
use opinion_kb::{DataModel, OpinionRecord};

fn ssa(holder: &str, target: &str, polarity: SentimentPolarity, expression: &str, intensity: SentimentIntensity) -> OpinionRecord {
    OpinionRecord::Ssa(SsaTuple {
        holder: Some(holder.into()),
        target: Some(target.into()),
        sentiment: Sentiment {
            polarity,
            expression: Some(expression.into()),
            intensity: Some(intensity),
        },
    })
}

fn main() {
    use SentimentIntensity::*;
    use SentimentPolarity::*;
    let schema = DataModel::Ssa.schema();
    let policy = ComparePolicy::default();
    let instance = EvalInstance {
        instance_id: "doc-1".into(),
        gold: vec![
            ssa("John McCain", "bankruptcy protections", Negative, "opposed", Average),
            ssa("voters", "the tax cut", Positive, "welcomed", Strong),
        ],
        predicted: vec![
            ssa("voters", "the tax cut", Positive, "liked", Weak),
            ssa("John McCain", "bankruptcy protections", Negative, "opposed", Average),
            ssa("analysts", "gas prices", Neutral, "noted", Weak),
        ],
    };
    let alignment = align(&instance, schema, &policy).unwrap();
    for p in &alignment.pairs {
        println!("predicted #{} -> gold #{}: overlap {:.2}", p.predicted, p.gold, p.overlap);
    }
    let report = corpus_metric(&[instance], schema, &policy).unwrap();
    println!(
        "TP {:.2}  P {}  R {}  F1 {}",
        report.tp,
        report.precision_pct(),
        report.recall_pct(),
        report.f1_pct()
    );
}
