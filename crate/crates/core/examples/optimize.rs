//! Bootstraps demonstrations and searches few-shot configurations against an
//! offline annotator whose accuracy depends on the demonstrations shown.

use std::collections::HashMap;
use std::path::Path;

use opinion_kb::dataset::read_instances;
use opinion_kb::llm::{Role, ScriptedClient};
use opinion_kb::pipeline::{evaluate_program, serialize_opinions, OptimizerBudget};
use opinion_kb::{optimize, DataModel, ModelConfig, OpinionRecord, Signature};

fn main() {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/ssa_docs.jsonl");
    let docs = read_instances(&fixture).expect("fixture");
    let (train, rest) = docs.split_at(30);
    let (eval, test) = rest.split_at(10);

    let gold: HashMap<String, Vec<OpinionRecord>> =
        docs.iter().map(|d| (d.text.clone(), d.opinions.clone())).collect();
    let client = ScriptedClient::new(ModelConfig::default(), move |messages| {
        let text = &messages.last().unwrap().content;
        let demo_chars: usize = messages
            .iter()
            .filter(|m| m.role == Role::Assistant)
            .map(|m| m.content.len())
            .sum();
        let mut opinions = gold.get(text).cloned().unwrap_or_default();
        if opinions.len() > 1 && (text.len() + demo_chars) % 3 == 0 {
            opinions.pop();
        }
        Ok(serialize_opinions(&opinions))
    });

    let budget = OptimizerBudget {
        trials: 6,
        seed: 3,
        ..OptimizerBudget::default()
    };
    let program = optimize(&Signature::for_model(DataModel::Ssa), &client, train, eval, &budget, 5, false).unwrap();
    let trace = program.optimizer_trace.as_ref().unwrap();
    println!("bootstrap pool: {} demonstrations", trace.pool.len());
    for (i, t) in trace.trials.iter().enumerate() {
        println!("trial {i}: F1 {:.4} with demos {:?}", t.f1, t.demo_ids);
    }
    println!("selected trial {}", trace.selected_trial);
    let held_out = evaluate_program(&program, &client, test).unwrap();
    println!("held-out F1 {} ({} failures)", held_out.report.f1_pct(), held_out.failures);
}
