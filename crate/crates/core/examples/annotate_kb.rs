//! Annotates a small corpus with a scripted offline annotator and appends
//! the results to a knowledge base.

use std::collections::HashMap;
use std::path::Path;

use chrono::{TimeZone, Utc};
use opinion_kb::dataset::read_instances;
use opinion_kb::kb::{Annotator, KbFilter, OnDuplicate, SCHEMA_VERSION};
use opinion_kb::llm::ScriptedClient;
use opinion_kb::pipeline::{annotate_batch, serialize_opinions};
use opinion_kb::{DataModel, KbEntry, KbStore, ModelConfig, ProgramArtifact, Signature};

fn main() {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/ssa_docs.jsonl");
    let docs = read_instances(&fixture).expect("fixture");

    // offline stand-in for a served model: answers with the reference labels
    // and fumbles the first reply for one document
    let answers: HashMap<String, String> = docs
        .iter()
        .map(|d| (d.text.clone(), serialize_opinions(&d.opinions)))
        .collect();
    let broken = docs[3].text.clone();
    let client = ScriptedClient::new(ModelConfig::default(), move |messages| {
        let last = &messages.last().unwrap().content;
        if *last == broken {
            return Ok("Sorry, here it is: [{'holder': ".into());
        }
        // a repair request ends with our error message; answer the text before it
        let text = messages.iter().rev().map(|m| &m.content).find(|c| answers.contains_key(*c));
        Ok(text.map_or_else(|| "[]".into(), |t| answers[t].clone()))
    });

    let program = ProgramArtifact::zero_shot(Signature::for_model(DataModel::Ssa), ModelConfig::default(), false);
    let texts: Vec<&str> = docs.iter().map(|d| d.text.as_str()).collect();
    let results = annotate_batch(&program, &client, &texts);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("kb.jsonl");
    let mut kb = KbStore::open(&path).unwrap();
    let annotator = Annotator {
        model_name: program.model_config.model_name.clone(),
        shots: program.shots,
        cot: program.cot,
    };
    let mut failed = 0;
    for (doc, result) in docs.iter().zip(results) {
        let Ok(r) = result else {
            failed += 1;
            continue;
        };
        if r.attempts_used > 1 {
            println!("{} repaired after {} attempts", doc.id, r.attempts_used);
        }
        let entry = KbEntry {
            doc_id: doc.id.clone(),
            date: doc.date.unwrap(),
            text: doc.text.clone(),
            data_model: DataModel::Ssa,
            annotator: annotator.clone(),
            opinions: r.opinions,
            warnings: r.warnings,
            schema_version: SCHEMA_VERSION.into(),
            created_at: Utc.with_ymd_and_hms(2024, 6, 1, 0, 0, 0).unwrap(),
        };
        kb.append(entry, OnDuplicate::Reject).unwrap();
    }
    kb.sync().unwrap();
    let stats = kb.stats(&KbFilter::default()).unwrap();
    println!("appended {} entries to {}, {failed} failed", kb.len(), path.display());
    println!(
        "{} to {}: {} documents, {} unique texts, daily median {}",
        stats.date_from, stats.date_to, stats.total, stats.unique_texts, stats.daily_median
    );
}

