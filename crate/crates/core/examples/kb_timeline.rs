//! Loads annotated documents into a knowledge base and walks it day by day.

use std::path::Path;

use chrono::{TimeZone, Utc};
use opinion_kb::dataset::read_instances;
use opinion_kb::kb::{Annotator, KbFilter, OnDuplicate, SCHEMA_VERSION};
use opinion_kb::{KbEntry, KbStore};

fn main() {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/ssa_docs.jsonl");
    let docs = read_instances(&fixture).expect("fixture");
    let dir = tempfile::tempdir().unwrap();
    let mut kb = KbStore::open(&dir.path().join("kb.jsonl")).unwrap();
    for d in docs {
        let entry = KbEntry {
            doc_id: d.id,
            date: d.date.unwrap(),
            text: d.text,
            data_model: d.data_model,
            annotator: Annotator {
                model_name: "reference".into(),
                shots: 0,
                cot: false,
            },
            opinions: d.opinions,
            warnings: vec![],
            schema_version: SCHEMA_VERSION.into(),
            created_at: Utc.with_ymd_and_hms(2024, 6, 1, 0, 0, 0).unwrap(),
        };
        kb.append(entry, OnDuplicate::Reject).unwrap();
    }

    let all = KbFilter::default();
    let stats = kb.stats(&all).unwrap();
    let mut day = stats.date_from;
    while day <= stats.date_to {
        let entries = kb.query_range(day, day, &all).unwrap();
        let opinions: usize = entries.iter().map(|e| e.opinions.len()).sum();
        println!("{day}: {:>2} documents, {:>3} opinions", entries.len(), opinions);
        day = day.succ_opt().unwrap();
    }
    println!(
        "total {} documents, {} unique texts, median {} per day",
        stats.total, stats.unique_texts, stats.daily_median
    );
}
