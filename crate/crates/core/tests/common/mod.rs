#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;

use proptest::prelude::*;
use sha2::{Digest, Sha256};

use opinion_kb::dataset::read_instances;
use opinion_kb::llm::{ClientError, Role, ScriptedClient};
use opinion_kb::pipeline::serialize_opinions;
use opinion_kb::schema::{
    leaf_values, AcosQuad, Sentiment, SentimentIntensity, SentimentPolarity, SsaTuple, UocOpinion,
};
use opinion_kb::{AnnotatedInstance, DataModel, ModelConfig, OpinionRecord};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn load(name: &str) -> Vec<AnnotatedInstance> {
    read_instances(&fixture(name)).expect("fixture parses")
}

// ------------------------------------------------------------ oracle

/// Maximum total matching-component count over every injective matching of
/// gold to predicted opinions, by exhaustive search.
pub fn brute_force_matched(gold: &[OpinionRecord], pred: &[OpinionRecord], model: DataModel) -> usize {
    let schema = model.schema();
    let g: Vec<_> = gold.iter().map(|o| leaf_values(o, schema).unwrap()).collect();
    let p: Vec<_> = pred.iter().map(|o| leaf_values(o, schema).unwrap()).collect();
    let w: Vec<Vec<usize>> = g
        .iter()
        .map(|gv| {
            p.iter()
                .map(|pv| gv.iter().zip(pv).filter(|(a, b)| a == b).count())
                .collect()
        })
        .collect();
    fn go(i: usize, used: &mut Vec<bool>, w: &[Vec<usize>]) -> usize {
        if i == w.len() {
            return 0;
        }
        // gold i left unmatched
        let mut best = go(i + 1, used, w);
        for j in 0..used.len() {
            if !used[j] {
                used[j] = true;
                best = best.max(w[i][j] + go(i + 1, used, w));
                used[j] = false;
            }
        }
        best
    }
    go(0, &mut vec![false; p.len()], &w)
}

// ------------------------------------------------------------ strategies

fn small_text() -> impl Strategy<Value = String> {
    prop::sample::select(vec!["alpha", "beta", "gamma", "Beta", " gamma  "]).prop_map(str::to_string)
}

fn opt_text() -> impl Strategy<Value = Option<String>> {
    prop::option::weighted(0.75, small_text())
}

fn polarity() -> impl Strategy<Value = SentimentPolarity> {
    prop::sample::select(SentimentPolarity::ALL.to_vec())
}

fn intensity() -> impl Strategy<Value = Option<SentimentIntensity>> {
    prop::option::weighted(0.8, prop::sample::select(SentimentIntensity::ALL.to_vec()))
}

fn sentiment() -> impl Strategy<Value = Sentiment> {
    (polarity(), opt_text(), intensity()).prop_map(|(polarity, expression, intensity)| Sentiment {
        polarity,
        expression,
        intensity,
    })
}

pub fn arb_ssa() -> impl Strategy<Value = OpinionRecord> {
    (opt_text(), small_text(), sentiment()).prop_map(|(holder, target, sentiment)| {
        OpinionRecord::Ssa(SsaTuple {
            holder,
            target: Some(target),
            sentiment,
        })
    })
}

pub fn arb_acos() -> impl Strategy<Value = OpinionRecord> {
    (opt_text(), small_text(), small_text(), opt_text(), polarity()).prop_map(|(aspect_term, e, a, opinion_span, polarity)| {
        OpinionRecord::Acos(AcosQuad {
            aspect_term,
            category_entity: e,
            category_attribute: a,
            opinion_span,
            polarity,
        })
    })
}

pub fn arb_uoc() -> impl Strategy<Value = OpinionRecord> {
    (
        small_text(),
        opt_text(),
        opt_text(),
        opt_text(),
        small_text(),
        sentiment(),
        opt_text(),
        opt_text(),
    )
        .prop_map(
            |(entity, holder_span, holder_entity, aspect_term, aspect_category, sentiment, reason, qualifier)| {
                OpinionRecord::Uoc(UocOpinion {
                    entity,
                    holder_span,
                    holder_entity,
                    aspect_term,
                    aspect_category,
                    sentiment,
                    reason,
                    qualifier,
                })
            },
        )
}

pub fn arb_model() -> impl Strategy<Value = DataModel> {
    prop::sample::select(DataModel::ALL.to_vec())
}

pub fn arb_opinion(model: DataModel) -> BoxedStrategy<OpinionRecord> {
    match model {
        DataModel::Ssa => arb_ssa().boxed(),
        DataModel::Acos => arb_acos().boxed(),
        DataModel::Uoc => arb_uoc().boxed(),
    }
}

pub fn arb_opinions(model: DataModel, max: usize) -> BoxedStrategy<Vec<OpinionRecord>> {
    prop::collection::vec(arb_opinion(model), 0..=max).boxed()
}

/// (model, gold, predicted) with up to `max` opinions per side.
pub fn arb_instance(max: usize) -> impl Strategy<Value = (DataModel, Vec<OpinionRecord>, Vec<OpinionRecord>)> {
    arb_model().prop_flat_map(move |m| (Just(m), arb_opinions(m, max), arb_opinions(m, max)))
}

// ------------------------------------------------------------ simulated model

/// Deterministic stand-in for an LLM: answers with the gold annotation of the
/// queried text, degraded by noise derived from a hash of the prompt, so
/// different instructions and demonstrations score differently.
pub fn simulated_client(instances: &[AnnotatedInstance], config: ModelConfig) -> ScriptedClient {
    let gold: HashMap<String, Vec<OpinionRecord>> = instances
        .iter()
        .map(|i| (i.text.clone(), i.opinions.clone()))
        .collect();
    ScriptedClient::new(config, move |messages| {
        let system = messages
            .first()
            .filter(|m| m.role == Role::System)
            .map(|m| m.content.as_str())
            .unwrap_or("");
        let users: Vec<&str> = messages
            .iter()
            .filter(|m| m.role == Role::User)
            .map(|m| m.content.as_str())
            .collect();
        let last = *users.last().ok_or(ClientError::EmptyResponse)?;
        let (query, repair) = if gold.contains_key(last) {
            (last, false)
        } else if users.len() >= 2 && gold.contains_key(users[users.len() - 2]) {
            (users[users.len() - 2], true)
        } else {
            return Ok("[]".to_string());
        };
        let demos = messages.iter().filter(|m| m.role == Role::Assistant).count() - usize::from(repair);
        let mut h = Sha256::new();
        h.update(system.as_bytes());
        h.update([0]);
        h.update(query.as_bytes());
        h.update(demos.to_le_bytes());
        let h = h.finalize();

        let answer = |ops: &[OpinionRecord]| {
            let payload = serialize_opinions(ops);
            if system.contains("Answer:") {
                format!("Reasoning: the text states these opinions.\nAnswer: {payload}")
            } else {
                payload
            }
        };
        let ops = &gold[query];
        if !repair && h[0] % 9 == 0 {
            let full = answer(ops);
            return Ok(full[..full.len() * 2 / 3].to_string());
        }
        let drop_mod = 4 + demos as u8;
        let mut out = Vec::new();
        for (i, op) in ops.iter().enumerate() {
            let b = h[1 + i % 30];
            if b % drop_mod == 0 {
                continue;
            }
            let mut op = op.clone();
            if b % 7 == 1 {
                if let OpinionRecord::Ssa(t) = &mut op {
                    t.sentiment.intensity = Some(SentimentIntensity::Weak);
                }
            }
            out.push(op);
        }
        Ok(answer(&out))
    })
}

// ------------------------------------------------------------ marshal fixtures

#[derive(Debug, serde::Deserialize)]
pub struct MarshalCase {
    pub name: String,
    pub data_model: DataModel,
    pub text: String,
    pub cot: bool,
    pub strategy: opinion_kb::marshal::RepairStrategy,
    pub completions: Vec<String>,
    pub expect: MarshalExpect,
}

#[derive(Debug, serde::Deserialize)]
pub struct MarshalExpect {
    pub outcome: String,
    pub attempts: usize,
    #[serde(default)]
    pub opinions: usize,
    #[serde(default)]
    pub warnings: Vec<opinion_kb::marshal::WarningKind>,
}

pub fn marshal_cases() -> Vec<MarshalCase> {
    let text = std::fs::read_to_string(fixture("marshal_cases.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// Runs one fixture case, serving repair requests from its completion list.
pub fn check_marshal_case(case: &MarshalCase) -> Result<(), String> {
    use opinion_kb::marshal::{marshal, MarshalConfig, MarshalFailure, RepairPolicy};
    let config = MarshalConfig {
        repair: RepairPolicy {
            max_attempts: 2,
            strategy: case.strategy,
        },
        ..MarshalConfig::default()
    };
    let mut rest = case.completions[1..].iter();
    let result = marshal(
        &case.completions[0],
        case.data_model.schema(),
        &case.text,
        &config,
        case.cot,
        |_, _| rest.next().cloned().ok_or("fixture has no further completions"),
    );
    let e = &case.expect;
    match (e.outcome.as_str(), result) {
        ("ok", Ok(r)) => {
            let kinds: Vec<_> = r.warnings.iter().map(|w| w.kind).collect();
            if r.opinions.len() != e.opinions || r.attempts_used != e.attempts || kinds != e.warnings {
                return Err(format!(
                    "{}: got {} opinions, {} attempts, warnings {:?}",
                    case.name,
                    r.opinions.len(),
                    r.attempts_used,
                    kinds
                ));
            }
            Ok(())
        }
        ("exhausted", Err(MarshalFailure::Exhausted { attempts, .. })) if attempts.len() == e.attempts => Ok(()),
        (want, got) => Err(format!("{}: expected {want}, got {got:?}", case.name)),
    }
}

// ------------------------------------------------------------ end to end

pub struct RunOutputs {
    pub program: PathBuf,
    pub report: PathBuf,
    pub kb: PathBuf,
}

pub fn created_at() -> chrono::DateTime<chrono::Utc> {
    use chrono::TimeZone;
    chrono::Utc.with_ymd_and_hms(2024, 6, 1, 0, 0, 0).unwrap()
}

/// Splits the SSA fixture into train / dev / test pools under `dir`.
pub fn write_pools(dir: &std::path::Path) -> (PathBuf, PathBuf, PathBuf) {
    use opinion_kb::dataset::write_instances;
    let docs = load("ssa_docs.jsonl");
    let paths = (dir.join("pool_train.jsonl"), dir.join("dev.jsonl"), dir.join("pool_test.jsonl"));
    write_instances(&paths.0, &docs[..24]).unwrap();
    write_instances(&paths.1, &docs[24..34]).unwrap();
    write_instances(&paths.2, &docs[34..]).unwrap();
    paths
}

/// sample -> train -> evaluate -> annotate, all outputs under `dir`.
pub fn run_end_to_end(dir: &std::path::Path, client: &dyn opinion_kb::ChatClient) -> RunOutputs {
    use opinion_kb::cli::*;
    use opinion_kb::pipeline::OptimizerBudget;
    use opinion_kb::sampler::SampleMode;
    let (pool_train, dev, pool_test) = write_pools(dir);
    let train = dir.join("train.jsonl");
    let test = dir.join("test.jsonl");
    for (input, output, mode, n) in [
        (&pool_train, &train, SampleMode::TrainEqual, 16),
        (&pool_test, &test, SampleMode::TestDensity, 10),
    ] {
        cmd_sample(&SampleArgs {
            input: input.clone(),
            profile_from: vec![],
            output: output.clone(),
            mode,
            target_n: n,
            seed: 7,
            cap_factor: 1.5,
            upper_bound: Some(4.0),
        })
        .unwrap();
    }
    let out = RunOutputs {
        program: dir.join("program.json"),
        report: dir.join("report.json"),
        kb: dir.join("kb.jsonl"),
    };
    cmd_train(
        &TrainArgs {
            data_model: DataModel::Ssa,
            train_path: train,
            eval_path: dev,
            shots: 5,
            cot: false,
            budget: OptimizerBudget {
                trials: 4,
                seed: 11,
                ..OptimizerBudget::default()
            },
            out_path: out.program.clone(),
        },
        client,
    )
    .unwrap();
    cmd_evaluate(
        &EvaluateArgs {
            program_path: out.program.clone(),
            test_path: test,
            report_path: out.report.clone(),
        },
        client,
    )
    .unwrap();
    cmd_annotate(
        &AnnotateArgs {
            program_path: out.program.clone(),
            corpus_path: fixture("corpus.jsonl"),
            corpus_format: CorpusFormat::Jsonl,
            kb_path: out.kb.clone(),
            resume: false,
            overwrite: false,
            created_at: Some(created_at()),
            batch_size: 16,
        },
        client,
    )
    .unwrap();
    out
}

pub fn simulated_for_fixtures() -> ScriptedClient {
    simulated_client(&load("ssa_docs.jsonl"), ModelConfig::default())
}

// ------------------------------------------------------------ agreement fixture

use chrono::{NaiveDate, TimeZone, Utc};
use opinion_kb::kb::{Annotator, KbEntry, SCHEMA_VERSION};

pub fn entry(doc: &str, model_name: &str, opinions: Vec<OpinionRecord>) -> KbEntry {
    let data_model = opinions.first().map_or(DataModel::Ssa, OpinionRecord::data_model);
    KbEntry {
        doc_id: doc.into(),
        date: NaiveDate::from_ymd_opt(2008, 6, 11).unwrap(),
        text: format!("text of {doc}"),
        data_model,
        annotator: Annotator {
            model_name: model_name.into(),
            shots: 5,
            cot: false,
        },
        opinions,
        warnings: vec![],
        schema_version: SCHEMA_VERSION.into(),
        created_at: Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap(),
    }
}

fn ssa(
    holder: Option<&str>,
    target: &str,
    polarity: SentimentPolarity,
    expression: &str,
    intensity: Option<SentimentIntensity>,
) -> OpinionRecord {
    OpinionRecord::Ssa(SsaTuple {
        holder: holder.map(str::to_string),
        target: Some(target.into()),
        sentiment: Sentiment {
            polarity,
            expression: Some(expression.into()),
            intensity,
        },
    })
}

/// Three documents annotated by two annotators. Counts per concept:
///
/// | concept    | A values | B values | matched | P   | R   | F1    |
/// |------------|----------|----------|---------|-----|-----|-------|
/// | target     | 3        | 3        | 1       | 1/3 | 1/3 | 33.33 |
/// | holder     | 3        | 2        | 2       | 1   | 2/3 | 80.00 |
/// | polarity   | 3        | 3        | 2       | 2/3 | 2/3 | 66.67 |
/// | expression | 3        | 3        | 2       | 2/3 | 2/3 | 66.67 |
/// | intensity  | 3        | 2        | 1       | 1/2 | 1/3 | 40.00 |
pub fn golden_kbs() -> (Vec<KbEntry>, Vec<KbEntry>) {
    use SentimentIntensity::*;
    use SentimentPolarity::*;
    let a = vec![
        entry("d1", "model-a", vec![ssa(Some("John McCain"), "bankruptcy protections", Negative, "opposed", Some(Average))]),
        entry(
            "d2",
            "model-a",
            vec![
                ssa(Some("Voters"), "the tax cut", Positive, "welcomed", Some(Average)),
                ssa(Some("Critics"), "gas prices", Negative, "slammed", Some(Strong)),
            ],
        ),
        entry("d3", "model-a", vec![]),
    ];
    let b = vec![
        entry("d1", "model-b", vec![ssa(Some("John McCain"), "bankruptcy protections", Negative, "opposed", Some(Weak))]),
        entry("d2", "model-b", vec![ssa(Some("Voters"), "tax cut", Positive, "welcomed", Some(Strong))]),
        entry("d3", "model-b", vec![ssa(None, "nuclear power", Neutral, "noted", None)]),
    ];
    (a, b)
}

