//! Declarative annotation programs.
//!
//! A [`Signature`] names the input and the output data model; a
//! [`ProgramArtifact`] freezes a signature together with its instruction,
//! demonstrations, chain-of-thought flag and model settings. [`optimize`]
//! compiles an artifact from annotated samples: demonstrations are gated by
//! how well a zero-shot program handles them, then a seeded random search
//! over (instruction, demonstration subset) picks the configuration with the
//! best evaluation F1.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use log::{info, warn};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::AnnotatedInstance;
use crate::llm::{ChatClient, ChatMessage, ClientError, ModelConfig};
use crate::marshal::{marshal, MarshalConfig, MarshalFailure, MarshalResult, MarshalWarning};
use crate::metric::{corpus_metric, ComparePolicy, EvalInstance, MetricReport};
use crate::schema::{DataModel, OpinionRecord, SchemaError};

/// Demonstration counts evaluated by default.
pub const STANDARD_SHOTS: [usize; 4] = [0, 5, 10, 15];

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error("artifact {path}: {message}")]
    Artifact { path: String, message: String },
    #[error("evaluation and training samples share instance ids: {0:?}")]
    OverlappingSamples(Vec<String>),
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

#[derive(Debug, Error)]
pub enum AnnotateError {
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error(transparent)]
    Marshal(#[from] MarshalFailure),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signature {
    pub input_description: String,
    pub output_schema: DataModel,
    pub task_instruction: String,
}

impl Signature {
    pub fn for_model(model: DataModel) -> Self {
        let task_instruction = match model {
            DataModel::Ssa => "Extract structured sentiment tuples from the text: who holds each opinion, what it is about, the words that express it, and its polarity and intensity.",
            DataModel::Acos => "Extract aspect-category-opinion-sentiment quadruples from the text: the aspect term, its category as an entity and attribute, the opinion span, and the sentiment.",
            DataModel::Uoc => "Extract unified opinion records from the text, covering the entity, holder, aspect, sentiment, reason and qualifier of each opinion.",
        };
        Signature {
            input_description: "text: a timestamped opinionated post".into(),
            output_schema: model,
            task_instruction: task_instruction.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DemoOrigin {
    Gold,
    Bootstrapped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Demonstration {
    pub id: String,
    pub text: String,
    pub opinions: Vec<OpinionRecord>,
    /// Single-instance F1 of the zero-shot program on this example.
    pub score: f64,
    pub origin: DemoOrigin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerBudget {
    pub instruction_candidates: usize,
    pub trials: usize,
    pub bootstrap_threshold: f64,
    pub seed: u64,
    /// Ask the model for instruction variants instead of using templates.
    #[serde(default)]
    pub propose_instructions_with_llm: bool,
}

impl Default for OptimizerBudget {
    fn default() -> Self {
        OptimizerBudget {
            instruction_candidates: 5,
            trials: 20,
            bootstrap_threshold: 0.5,
            seed: 0,
            propose_instructions_with_llm: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub instruction_index: usize,
    pub demo_ids: Vec<String>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolEntry {
    pub id: String,
    pub score: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerTrace {
    pub budget: OptimizerBudget,
    pub instructions: Vec<String>,
    pub pool: Vec<PoolEntry>,
    pub trials: Vec<TrialRecord>,
    pub selected_trial: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgramArtifact {
    pub signature: Signature,
    pub demos: Vec<Demonstration>,
    pub shots: usize,
    pub cot: bool,
    pub model_config: ModelConfig,
    #[serde(default)]
    pub marshal: MarshalConfig,
    #[serde(default)]
    pub optimizer_trace: Option<OptimizerTrace>,
}

impl ProgramArtifact {
    /// A program without demonstrations.
    pub fn zero_shot(signature: Signature, model_config: ModelConfig, cot: bool) -> Self {
        ProgramArtifact {
            signature,
            demos: Vec::new(),
            shots: 0,
            cot,
            model_config,
            marshal: MarshalConfig::default(),
            optimizer_trace: None,
        }
    }

    pub fn data_model(&self) -> DataModel {
        self.signature.output_schema
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.signature.task_instruction.trim().is_empty() {
            return Err("task instruction is empty".into());
        }
        if self.demos.len() != self.shots {
            return Err(format!(
                "artifact declares {} shots but carries {} demonstrations",
                self.shots,
                self.demos.len()
            ));
        }
        let model = self.data_model();
        for d in &self.demos {
            for op in &d.opinions {
                if op.data_model() != model {
                    return Err(format!("demonstration {} holds a {} opinion", d.id, op.data_model()));
                }
                op.validate().map_err(|e| format!("demonstration {}: {e}", d.id))?;
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<(), PipelineError> {
        fs::write(path, self.to_json()).map_err(|e| PipelineError::Artifact {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let err = |message: String| PipelineError::Artifact {
            path: path.display().to_string(),
            message,
        };
        let text = fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let artifact: ProgramArtifact = serde_json::from_str(&text).map_err(|e| err(e.to_string()))?;
        artifact.validate().map_err(err)?;
        Ok(artifact)
    }
}

const FORMAT_PLAIN: &str =
    "Respond with only a JSON list of opinion objects and nothing else.";
const FORMAT_COT: &str = "Think step by step: first explain your reasoning after \"Reasoning:\", then write \"Answer:\" followed by the JSON list of opinion objects.";
const FORMAT_COMMON: &str =
    "Use null for absent values and an empty list [] when the text expresses no opinion.";

/// The system message's output-format clause that chain-of-thought toggles.
pub fn format_clause(cot: bool) -> &'static str {
    if cot {
        FORMAT_COT
    } else {
        FORMAT_PLAIN
    }
}

/// Canonical serialization of an opinion list, as used in demonstrations.
pub fn serialize_opinions(opinions: &[OpinionRecord]) -> String {
    let values: Vec<_> = opinions.iter().map(OpinionRecord::to_value).collect();
    serde_json::to_string(&values).expect("serializable")
}

/// Builds the chat messages for annotating `text`: one system message, one
/// user/assistant pair per demonstration, then the text itself.
pub fn synthesize_prompt(program: &ProgramArtifact, text: &str) -> Vec<ChatMessage> {
    let schema = program.data_model().schema();
    let system = format!(
        "{}\n\n{}\n\n{}\n{}",
        program.signature.task_instruction,
        schema.field_descriptions(),
        format_clause(program.cot),
        FORMAT_COMMON
    );
    let mut messages = Vec::with_capacity(2 + 2 * program.demos.len());
    messages.push(ChatMessage::system(system));
    for demo in &program.demos {
        messages.push(ChatMessage::user(demo.text.clone()));
        messages.push(ChatMessage::assistant(serialize_opinions(&demo.opinions)));
    }
    messages.push(ChatMessage::user(text));
    messages
}

/// Annotates one text: prompt, complete, marshal (repairs go back through
/// the same client).
pub fn annotate_one(
    program: &ProgramArtifact,
    client: &dyn ChatClient,
    text: &str,
) -> Result<MarshalResult, AnnotateError> {
    let messages = synthesize_prompt(program, text);
    let raw = client.complete(&messages)?;
    let schema = program.data_model().schema();
    let result = marshal(&raw, schema, text, &program.marshal, program.cot, |failed, error| {
        let mut followup = messages.clone();
        followup.push(ChatMessage::assistant(failed));
        followup.push(ChatMessage::user(format!(
            "Your previous answer could not be read ({error}). Reply again with only the corrected JSON list of opinion objects."
        )));
        client.complete(&followup)
    })?;
    Ok(result)
}

/// Annotates texts concurrently (bounded by the client's in-flight limit);
/// results come back in input order.
pub fn annotate_batch(
    program: &ProgramArtifact,
    client: &dyn ChatClient,
    texts: &[&str],
) -> Vec<Result<MarshalResult, AnnotateError>> {
    let workers = client.max_in_flight().min(texts.len()).max(1);
    if workers == 1 {
        return texts.iter().map(|t| annotate_one(program, client, t)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<MarshalResult, AnnotateError>>>> =
        texts.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= texts.len() {
                    break;
                }
                let r = annotate_one(program, client, texts[i]);
                *slots[i].lock().unwrap() = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.into_inner().unwrap().expect("every slot filled"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDiagnostics {
    pub id: String,
    pub n_gold: usize,
    pub n_pred: usize,
    pub overlap: f64,
    pub f1: f64,
    pub attempts: usize,
    pub warnings: Vec<MarshalWarning>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub report: MetricReport,
    pub failures: usize,
    pub instances: Vec<InstanceDiagnostics>,
}

/// Annotates every instance and scores predictions against gold. Marshal
/// failures count as empty predictions.
pub fn evaluate_program(
    program: &ProgramArtifact,
    client: &dyn ChatClient,
    instances: &[AnnotatedInstance],
) -> Result<Evaluation, PipelineError> {
    let schema = program.data_model().schema();
    let policy = ComparePolicy::default();
    let texts: Vec<&str> = instances.iter().map(|i| i.text.as_str()).collect();
    let results = annotate_batch(program, client, &texts);
    let mut eval_instances = Vec::with_capacity(instances.len());
    let mut diagnostics = Vec::with_capacity(instances.len());
    let mut failures = 0;
    for (inst, result) in instances.iter().zip(results) {
        let (predicted, attempts, warnings, failure) = match result {
            Ok(r) => (r.opinions, r.attempts_used, r.warnings, None),
            Err(AnnotateError::Client(e)) if !is_recoverable(&e) => return Err(e.into()),
            Err(e) => {
                failures += 1;
                warn!("instance {} failed: {e}", inst.id);
                (Vec::new(), 0, Vec::new(), Some(e.to_string()))
            }
        };
        let ev = EvalInstance {
            instance_id: inst.id.clone(),
            gold: inst.opinions.clone(),
            predicted,
        };
        let single = corpus_metric(std::slice::from_ref(&ev), schema, &policy)?;
        diagnostics.push(InstanceDiagnostics {
            id: inst.id.clone(),
            n_gold: ev.gold.len(),
            n_pred: ev.predicted.len(),
            overlap: single.tp,
            f1: single.f1,
            attempts,
            warnings,
            failure,
        });
        eval_instances.push(ev);
    }
    let report = corpus_metric(&eval_instances, schema, &policy)?;
    Ok(Evaluation {
        report,
        failures,
        instances: diagnostics,
    })
}

/// Client errors that concern one request only; anything else (bad config,
/// missing replay store) aborts the run.
fn is_recoverable(e: &ClientError) -> bool {
    matches!(
        e,
        ClientError::EmptyResponse | ClientError::Transport { .. } | ClientError::Request { .. }
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoPool {
    /// Accepted demonstrations, in training-sample order.
    pub demos: Vec<Demonstration>,
    /// Score of every training instance.
    pub entries: Vec<PoolEntry>,
    pub warnings: Vec<String>,
}

/// Scores each training instance with a zero-shot program and keeps the
/// gold annotation of those scoring at least the threshold.
pub fn bootstrap_demos(
    signature: &Signature,
    client: &dyn ChatClient,
    train: &[AnnotatedInstance],
    budget: &OptimizerBudget,
) -> Result<DemoPool, PipelineError> {
    let program = ProgramArtifact::zero_shot(signature.clone(), client.config().clone(), false);
    let evaluation = evaluate_program(&program, client, train)?;
    let mut demos = Vec::new();
    let mut entries = Vec::new();
    let mut warnings = Vec::new();
    for (inst, diag) in train.iter().zip(&evaluation.instances) {
        let score = if diag.failure.is_some() { 0.0 } else { diag.f1 };
        let accepted = score >= budget.bootstrap_threshold;
        if accepted {
            demos.push(Demonstration {
                id: inst.id.clone(),
                text: inst.text.clone(),
                opinions: inst.opinions.clone(),
                score,
                origin: DemoOrigin::Bootstrapped,
            });
        }
        entries.push(PoolEntry {
            id: inst.id.clone(),
            score,
            accepted,
        });
    }
    if !train.is_empty() && evaluation.failures == train.len() {
        warnings.push("every training instance failed to marshal; the demonstration pool is empty".into());
        demos.clear();
        entries.iter_mut().for_each(|e| e.accepted = false);
    }
    Ok(DemoPool {
        demos,
        entries,
        warnings,
    })
}

fn facet_list(model: DataModel) -> String {
    let names: Vec<String> = model
        .schema()
        .leaf_components
        .iter()
        .map(|c| c.name.replace('_', " "))
        .collect();
    match names.split_last() {
        Some((last, rest)) if !rest.is_empty() => format!("{} and {last}", rest.join(", ")),
        _ => names.join(""),
    }
}

const INSTRUCTION_TEMPLATES: &[&str] = &[
    "Read the text and list every opinion it contains. For each opinion fill in the {facets}.",
    "You are an expert opinion annotator. Identify the {facets} of each opinion expressed in the text.",
    "Extract all opinions from the text as structured records covering {facets}. Copy spans verbatim from the text.",
    "Annotate the opinions in the text. Each record must specify the {facets}; use null for anything the text does not state.",
    "Find each distinct opinion in the text and describe it by its {facets}. Do not invent opinions that are not expressed.",
    "List the opinions in the text, one record per opinion, giving {facets}.",
];

/// Instruction candidates: the signature's instruction followed by template
/// paraphrases over the data model's facet names.
pub fn instruction_candidates(signature: &Signature, count: usize) -> Vec<String> {
    let facets = facet_list(signature.output_schema);
    std::iter::once(signature.task_instruction.clone())
        .chain(INSTRUCTION_TEMPLATES.iter().map(|t| t.replace("{facets}", &facets)))
        .take(count.max(1))
        .collect()
}

fn propose_instructions(
    signature: &Signature,
    client: &dyn ChatClient,
    count: usize,
) -> Result<Vec<String>, ClientError> {
    let schema = signature.output_schema.schema();
    let mut out = vec![signature.task_instruction.clone()];
    for variant in 1..count.max(1) {
        let messages = [
            ChatMessage::system("You write concise task instructions for opinion annotation models."),
            ChatMessage::user(format!(
                "Write instruction variant {variant} for this annotation task. Reply with the instruction only.\n\nTask: {}\n\n{}",
                signature.task_instruction,
                schema.field_descriptions()
            )),
        ];
        let proposal = client.complete(&messages)?;
        let proposal = proposal.trim();
        if !proposal.is_empty() {
            out.push(proposal.to_string());
        }
    }
    Ok(out)
}

fn draw_demos(rng: &mut ChaCha8Rng, candidates: &[Demonstration], k: usize) -> Vec<usize> {
    let indices: Vec<usize> = (0..candidates.len()).collect();
    let mut chosen: Vec<usize> = indices
        .choose_multiple_weighted(rng, k, |&i| candidates[i].score.max(0.01))
        .expect("positive weights")
        .copied()
        .collect();
    chosen.sort_unstable();
    chosen
}

/// Compiles a program for `signature` with `shots` demonstrations.
pub fn optimize(
    signature: &Signature,
    client: &dyn ChatClient,
    train: &[AnnotatedInstance],
    eval: &[AnnotatedInstance],
    budget: &OptimizerBudget,
    shots: usize,
    cot: bool,
) -> Result<ProgramArtifact, PipelineError> {
    let train_ids: HashSet<&str> = train.iter().map(|i| i.id.as_str()).collect();
    let shared: Vec<String> = eval
        .iter()
        .filter(|i| train_ids.contains(i.id.as_str()))
        .map(|i| i.id.clone())
        .collect();
    if !shared.is_empty() {
        return Err(PipelineError::OverlappingSamples(shared));
    }

    let instructions = if budget.propose_instructions_with_llm {
        propose_instructions(signature, client, budget.instruction_candidates)?
    } else {
        instruction_candidates(signature, budget.instruction_candidates)
    };

    let (pool_entries, mut candidates) = if shots == 0 {
        (Vec::new(), Vec::new())
    } else {
        let pool = bootstrap_demos(signature, client, train, budget)?;
        for w in &pool.warnings {
            warn!("{w}");
        }
        let mut candidates = pool.demos;
        if candidates.len() < shots {
            // top up with the remaining gold examples, best scored first
            let accepted: HashSet<String> = candidates.iter().map(|d| d.id.clone()).collect();
            let mut rest: Vec<(usize, &PoolEntry)> = pool
                .entries
                .iter()
                .enumerate()
                .filter(|(_, e)| !accepted.contains(&e.id))
                .collect();
            rest.sort_by(|a, b| b.1.score.total_cmp(&a.1.score).then(a.0.cmp(&b.0)));
            for (i, e) in rest.into_iter().take(shots - candidates.len()) {
                candidates.push(Demonstration {
                    id: train[i].id.clone(),
                    text: train[i].text.clone(),
                    opinions: train[i].opinions.clone(),
                    score: e.score,
                    origin: DemoOrigin::Gold,
                });
            }
        }
        (pool.entries, candidates)
    };
    let effective_shots = shots.min(candidates.len());
    if effective_shots < shots {
        warn!("only {effective_shots} demonstrations available for {shots} requested shots");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let mut cache: HashMap<(usize, Vec<usize>), (MetricReport, usize)> = HashMap::new();
    let mut trials = Vec::with_capacity(budget.trials);
    let mut configs = Vec::with_capacity(budget.trials);
    let base = ProgramArtifact {
        signature: signature.clone(),
        demos: Vec::new(),
        shots: effective_shots,
        cot,
        model_config: client.config().clone(),
        marshal: MarshalConfig::default(),
        optimizer_trace: None,
    };
    for trial in 0..budget.trials.max(1) {
        let instruction_index = rng.gen_range(0..instructions.len());
        let demo_idx = draw_demos(&mut rng, &candidates, effective_shots);
        let key = (instruction_index, demo_idx.clone());
        let (report, failures) = match cache.get(&key) {
            Some(hit) => *hit,
            None => {
                let mut program = base.clone();
                program.signature.task_instruction = instructions[instruction_index].clone();
                program.demos = demo_idx.iter().map(|&i| candidates[i].clone()).collect();
                let evaluation = evaluate_program(&program, client, eval)?;
                let entry = (evaluation.report, evaluation.failures);
                cache.insert(key, entry);
                entry
            }
        };
        info!(
            "trial {trial}: instruction {instruction_index}, {} demos, F1 {:.4}",
            demo_idx.len(),
            report.f1
        );
        trials.push(TrialRecord {
            trial,
            instruction_index,
            demo_ids: demo_idx.iter().map(|&i| candidates[i].id.clone()).collect(),
            precision: report.precision,
            recall: report.recall,
            f1: report.f1,
            failures,
        });
        configs.push((instruction_index, demo_idx));
    }

    let best = select_best(&trials);
    let (instruction_index, demo_idx) = configs.swap_remove(best);
    let mut program = base;
    program.signature.task_instruction = instructions[instruction_index].clone();
    program.demos = demo_idx.iter().map(|&i| candidates[i].clone()).collect();
    candidates.clear();
    program.optimizer_trace = Some(OptimizerTrace {
        budget: budget.clone(),
        instructions,
        pool: pool_entries,
        trials,
        selected_trial: best,
    });
    Ok(program)
}

/// Highest F1; ties go to higher recall, then to the earlier trial.
pub fn select_best(trials: &[TrialRecord]) -> usize {
    let mut best = 0;
    for (i, t) in trials.iter().enumerate().skip(1) {
        let b = &trials[best];
        if t.f1 > b.f1 || (t.f1 == b.f1 && t.recall > b.recall) {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn program(shots: usize, cot: bool) -> ProgramArtifact {
        let mut p = ProgramArtifact::zero_shot(Signature::for_model(DataModel::Ssa), ModelConfig::default(), cot);
        p.demos = (0..shots)
            .map(|i| Demonstration {
                id: format!("d{i}"),
                text: format!("text {i}"),
                opinions: Vec::new(),
                score: 1.0,
                origin: DemoOrigin::Gold,
            })
            .collect();
        p.shots = shots;
        p
    }

    #[test]
    fn prompt_arity() {
        for shots in STANDARD_SHOTS {
            let m = synthesize_prompt(&program(shots, false), "t");
            assert_eq!(m.len(), 2 + 2 * shots);
            assert_eq!(m.last().unwrap().content, "t");
        }
    }

    #[test]
    fn cot_changes_one_line() {
        let a = &synthesize_prompt(&program(5, false), "t");
        let b = &synthesize_prompt(&program(5, true), "t");
        assert_eq!(a[1..], b[1..]);
        let la: Vec<_> = a[0].content.lines().collect();
        let lb: Vec<_> = b[0].content.lines().collect();
        assert_eq!(la.len(), lb.len());
        let diff: Vec<_> = la.iter().zip(&lb).filter(|(x, y)| x != y).collect();
        assert_eq!(diff, vec![(&FORMAT_PLAIN, &FORMAT_COT)]);
    }

    #[test]
    fn tie_breaking() {
        let t = |trial, recall, f1| TrialRecord {
            trial,
            instruction_index: 0,
            demo_ids: vec![],
            precision: 0.0,
            recall,
            f1,
            failures: 0,
        };
        assert_eq!(select_best(&[t(0, 0.5, 0.4), t(1, 0.6, 0.5)]), 1);
        assert_eq!(select_best(&[t(0, 0.5, 0.5), t(1, 0.6, 0.5)]), 1);
        assert_eq!(select_best(&[t(0, 0.6, 0.5), t(1, 0.6, 0.5)]), 0);
        assert_eq!(select_best(&[t(0, 0.6, 0.5)]), 0);
    }

    #[test]
    fn instruction_templates_use_facets() {
        let c = instruction_candidates(&Signature::for_model(DataModel::Acos), 5);
        assert_eq!(c.len(), 5);
        assert!(c[1].contains("aspect term, category entity, category attribute, opinion span and polarity"));
        assert_eq!(instruction_candidates(&Signature::for_model(DataModel::Acos), 0).len(), 1);
    }

    #[test]
    fn artifact_validation() {
        let mut p = program(2, false);
        assert!(p.validate().is_ok());
        p.shots = 3;
        assert!(p.validate().is_err());
    }
}
