//! Marshals messy completions: a Python-literal answer after reasoning, a
//! truncated list repaired by reprompting, and one kept as a valid prefix.

use opinion_kb::marshal::{marshal, MarshalConfig, RepairPolicy, RepairStrategy};
use opinion_kb::DataModel;

const TEXT: &str = "John McCain opposed the bankruptcy protections, while voters welcomed the tax cut.";

const FULL: &str = "[{'holder': 'John McCain', 'target': 'bankruptcy protections', \
'sentiment': {'polarity': 'negative', 'expression': 'opposed', 'intensity': 'average'}}, \
{'holder': 'voters', 'target': 'the tax cut', \
'sentiment': {'polarity': 'positive', 'expression': 'welcomed', 'intensity': 'strong'}}]";

fn main() {
    let schema = DataModel::Ssa.schema();
    let config = MarshalConfig::default();

    let cot = format!("Reasoning: two holders express views.\nAnswer: {FULL}");
    let r = marshal(&cot, schema, TEXT, &config, true, |_, _| Err::<String, _>("unused")).unwrap();
    println!("chain of thought: {} opinions in {} attempt(s)", r.opinions.len(), r.attempts_used);

    let truncated = &FULL[..FULL.len() - 40];
    let r = marshal(truncated, schema, TEXT, &config, false, |failed, error| {
        println!("  reprompting after {error} ({} chars received)", failed.len());
        Ok::<_, std::convert::Infallible>(FULL.to_string())
    })
    .unwrap();
    println!("reprompt: {} opinions in {} attempt(s)", r.opinions.len(), r.attempts_used);

    let prefix = MarshalConfig {
        repair: RepairPolicy {
            max_attempts: 2,
            strategy: RepairStrategy::TruncateToValidPrefix,
        },
        ..config
    };
    let r = marshal(truncated, schema, TEXT, &prefix, false, |_, _| Err::<String, _>("unused")).unwrap();
    println!("prefix: {} opinion(s), warnings {:?}", r.opinions.len(), r.warnings);

    let gibberish = marshal("I cannot help with that.", schema, TEXT, &config, false, |_, _| {
        Ok::<_, std::convert::Infallible>("still no list".to_string())
    });
    match gibberish {
        Err(f) => println!("gave up after {} attempts", f.attempts().len()),
        Ok(_) => unreachable!(),
    }
}
