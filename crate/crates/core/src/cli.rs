//! Command implementations behind the `opinionkb` binary.
//!
//! Each `cmd_*` function takes its resolved arguments (and a chat client
//! where one is needed), writes its outputs plus a `<output>.manifest.json`
//! run manifest, and returns what it produced.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use chrono::{DateTime, NaiveDate, Utc};
use log::{info, warn};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::agreement::{agreement_table, render_table, AgreementReport};
use crate::dataset::{read_instances, write_instances, AnnotatedInstance, DatasetError};
use crate::kb::{document_stats, stats, Annotator, KbEntry, KbError, KbFilter, KbStats, KbStore, OnDuplicate, SCHEMA_VERSION};
use crate::llm::{AuditLog, ChatClient, ClientError, HttpClient, ModelConfig, RecordingClient, ReplayClient};
use crate::metric::pct;
use crate::pipeline::{annotate_batch, evaluate_program, optimize, AnnotateError, InstanceDiagnostics, OptimizerBudget, PipelineError, ProgramArtifact, Signature, STANDARD_SHOTS};
use crate::sampler::{combined_upper_bound, density_profile, exclude_outliers, sample_test, sample_train, DensityProfile, SampleMode, SamplePlan};
use crate::schema::DataModel;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid arguments: {0}")]
    Argument(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid data: {0}")]
    Data(String),
    #[error("model client error: {0}")]
    Client(#[from] ClientError),
    #[error("optimizer error: {0}")]
    Optimizer(PipelineError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Argument(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Client(_) => 4,
            CliError::Optimizer(_) => 5,
            CliError::Data(_) => 6,
        }
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io { path, source } => CliError::Io {
                path,
                message: source.to_string(),
            },
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<KbError> for CliError {
    fn from(e: KbError) -> Self {
        match e {
            KbError::Io { path, source } => CliError::Io {
                path,
                message: source.to_string(),
            },
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Client(c) => CliError::Client(c),
            PipelineError::Artifact { path, message } => CliError::Io { path, message },
            other => CliError::Optimizer(other),
        }
    }
}

/// Provenance record written next to every command output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub config: Value,
    pub seeds: Vec<u64>,
    /// Input path -> SHA-256 of its contents.
    pub inputs: BTreeMap<String, String>,
    pub outputs: Vec<String>,
    pub started_at: DateTime<Utc>,
    pub wall_clock_ms: u64,
    #[serde(default)]
    pub details: Value,
}

pub fn file_digest(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

struct ManifestBuilder {
    command: &'static str,
    started_at: DateTime<Utc>,
    clock: Instant,
}

impl ManifestBuilder {
    fn start(command: &'static str) -> Self {
        ManifestBuilder {
            command,
            started_at: Utc::now(),
            clock: Instant::now(),
        }
    }

    fn finish(
        self,
        config: Value,
        seeds: Vec<u64>,
        inputs: &[&Path],
        outputs: &[&Path],
        details: Value,
    ) -> Result<RunManifest, CliError> {
        let mut digests = BTreeMap::new();
        for p in inputs {
            digests.insert(p.display().to_string(), file_digest(p)?);
        }
        let manifest = RunManifest {
            command: self.command.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            config,
            seeds,
            inputs: digests,
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
            started_at: self.started_at,
            wall_clock_ms: self.clock.elapsed().as_millis() as u64,
            details,
        };
        if let Some(primary) = outputs.first() {
            let path = manifest_path(primary);
            let text = serde_json::to_string_pretty(&manifest).expect("serializable");
            fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        }
        Ok(manifest)
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

/// Plain `key = value` configuration; `#` starts a comment.
pub fn read_config_file(path: &Path) -> Result<HashMap<String, String>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut map = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Argument(format!("{}:{}: expected `key = value`", path.display(), i + 1))
        })?;
        let v = v.trim().trim_matches('"');
        map.insert(k.trim().replace('-', "_"), v.to_string());
    }
    Ok(map)
}

/// How a chat client should be built from command-line settings.
#[derive(Debug, Clone, Default)]
pub struct ClientSpec {
    pub model: ModelConfig,
    pub replay: Option<PathBuf>,
    pub record: Option<PathBuf>,
    pub audit_log: Option<PathBuf>,
}

pub fn build_client(spec: &ClientSpec) -> Result<Box<dyn ChatClient>, CliError> {
    spec.model.validate()?;
    if let Some(store) = &spec.replay {
        return Ok(Box::new(ReplayClient::open(store, spec.model.clone())?));
    }
    let mut http = HttpClient::new(spec.model.clone())?;
    if let Some(log) = &spec.audit_log {
        http = http.with_audit_log(AuditLog::open(log)?);
    }
    match &spec.record {
        Some(store) => Ok(Box::new(RecordingClient::open(http, store)?)),
        None => Ok(Box::new(http)),
    }
}

// ---------------------------------------------------------------- sample

#[derive(Debug, Clone)]
pub struct SampleArgs {
    pub input: PathBuf,
    /// Extra splits pooled into the density profile.
    pub profile_from: Vec<PathBuf>,
    pub output: PathBuf,
    pub mode: SampleMode,
    pub target_n: usize,
    pub seed: u64,
    pub cap_factor: f64,
    /// Overrides the computed bound (e.g. a bound combined across models).
    pub upper_bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SamplingManifest {
    pub profile: DensityProfileSummary,
    pub upper_bound: f64,
    pub inliers: usize,
    pub excluded: usize,
    pub plan: SamplePlan,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityProfileSummary {
    pub instances: usize,
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    pub upper_bound: f64,
}

impl From<&DensityProfile> for DensityProfileSummary {
    fn from(p: &DensityProfile) -> Self {
        DensityProfileSummary {
            instances: p.counts.len(),
            q1: p.q1,
            q3: p.q3,
            iqr: p.iqr,
            upper_bound: p.upper_bound,
        }
    }
}

pub fn cmd_sample(args: &SampleArgs) -> Result<SamplingManifest, CliError> {
    let run = ManifestBuilder::start("sample");
    let instances = read_instances(&args.input)?;
    let mut pooled = instances.clone();
    for extra in &args.profile_from {
        pooled.extend(read_instances(extra)?);
    }
    let profile = density_profile(&pooled).map_err(|e| CliError::Data(format!("{}: {e}", args.input.display())))?;
    let bound = match args.upper_bound {
        Some(b) => combined_upper_bound(&[b]).unwrap_or(b),
        None => profile.upper_bound,
    };
    let inliers = exclude_outliers(&instances, bound);
    let sample = match args.mode {
        SampleMode::TrainEqual => sample_train(&inliers, args.target_n, args.seed),
        SampleMode::TestDensity => sample_test(&inliers, args.target_n, args.seed, args.cap_factor),
    };
    for w in &sample.warnings {
        warn!("{w}");
    }
    write_instances(&args.output, &sample.items)?;
    let manifest = SamplingManifest {
        profile: (&profile).into(),
        upper_bound: bound,
        inliers: inliers.len(),
        excluded: instances.len() - inliers.len(),
        plan: sample.plan,
        warnings: sample.warnings,
    };
    let mut inputs: Vec<&Path> = vec![&args.input];
    inputs.extend(args.profile_from.iter().map(PathBuf::as_path));
    run.finish(
        json!({
            "mode": args.mode,
            "target_n": args.target_n,
            "cap_factor": args.cap_factor,
            "upper_bound_override": args.upper_bound,
        }),
        vec![args.seed],
        &inputs,
        &[&args.output],
        serde_json::to_value(&manifest).expect("serializable"),
    )?;
    Ok(manifest)
}

// ---------------------------------------------------------------- train

#[derive(Debug, Clone)]
pub struct TrainArgs {
    pub data_model: DataModel,
    pub train_path: PathBuf,
    pub eval_path: PathBuf,
    pub shots: usize,
    pub cot: bool,
    pub budget: OptimizerBudget,
    pub out_path: PathBuf,
}

fn load_for_model(path: &Path, model: DataModel) -> Result<Vec<AnnotatedInstance>, CliError> {
    let instances = read_instances(path)?;
    if let Some(bad) = instances.iter().find(|i| i.data_model != model) {
        return Err(CliError::Data(format!(
            "{}: instance {} is annotated with {} but {} was requested",
            path.display(),
            bad.id,
            bad.data_model,
            model
        )));
    }
    Ok(instances)
}

pub fn cmd_train(args: &TrainArgs, client: &dyn ChatClient) -> Result<ProgramArtifact, CliError> {
    let run = ManifestBuilder::start("train");
    if !STANDARD_SHOTS.contains(&args.shots) {
        warn!("{} shots is outside the standard settings {:?}", args.shots, STANDARD_SHOTS);
    }
    let train = load_for_model(&args.train_path, args.data_model)?;
    let eval = load_for_model(&args.eval_path, args.data_model)?;
    let signature = Signature::for_model(args.data_model);
    let artifact = optimize(&signature, client, &train, &eval, &args.budget, args.shots, args.cot)?;
    artifact.save(&args.out_path)?;
    let best = artifact
        .optimizer_trace
        .as_ref()
        .map(|t| t.trials[t.selected_trial].clone());
    if let Some(t) = &best {
        println!(
            "best eval F1 {} (P {} R {}) from trial {}",
            pct(t.f1),
            pct(t.precision),
            pct(t.recall),
            t.trial
        );
    }
    run.finish(
        json!({
            "data_model": args.data_model,
            "shots": args.shots,
            "cot": args.cot,
            "budget": args.budget,
            "model": client.config(),
        }),
        vec![args.budget.seed],
        &[&args.train_path, &args.eval_path],
        &[&args.out_path],
        json!({ "best_trial": best }),
    )?;
    Ok(artifact)
}

// ---------------------------------------------------------------- evaluate

#[derive(Debug, Clone)]
pub struct EvaluateArgs {
    pub program_path: PathBuf,
    pub test_path: PathBuf,
    pub report_path: PathBuf,
}

/// Machine-readable evaluation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub data_model: DataModel,
    pub model_name: String,
    pub shots: usize,
    pub cot: bool,
    pub tp: f64,
    pub n_pred: usize,
    pub n_gold: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub precision_pct: String,
    pub recall_pct: String,
    pub f1_pct: String,
    pub failures: usize,
    pub instances: Vec<InstanceDiagnostics>,
}

impl EvaluationReport {
    pub fn summary(&self) -> String {
        format!(
            "{} {} ({}-shot, cot {}): P {}  R {}  F1 {}  [tp {:.4}, predicted {}, gold {}, failures {}]",
            self.data_model.label(),
            self.model_name,
            self.shots,
            if self.cot { "Y" } else { "N" },
            self.precision_pct,
            self.recall_pct,
            self.f1_pct,
            self.tp,
            self.n_pred,
            self.n_gold,
            self.failures
        )
    }
}

pub fn cmd_evaluate(args: &EvaluateArgs, client: &dyn ChatClient) -> Result<EvaluationReport, CliError> {
    let run = ManifestBuilder::start("evaluate");
    let program = ProgramArtifact::load(&args.program_path)?;
    let test = load_for_model(&args.test_path, program.data_model())?;
    let evaluation = evaluate_program(&program, client, &test)?;
    let r = evaluation.report;
    let report = EvaluationReport {
        data_model: program.data_model(),
        model_name: client.config().model_name.clone(),
        shots: program.shots,
        cot: program.cot,
        tp: r.tp,
        n_pred: r.n_pred,
        n_gold: r.n_gold,
        precision: r.precision,
        recall: r.recall,
        f1: r.f1,
        precision_pct: r.precision_pct(),
        recall_pct: r.recall_pct(),
        f1_pct: r.f1_pct(),
        failures: evaluation.failures,
        instances: evaluation.instances,
    };
    write_json(&args.report_path, &report)?;
    println!("{}", report.summary());
    run.finish(
        json!({ "model": client.config() }),
        vec![],
        &[&args.program_path, &args.test_path],
        &[&args.report_path],
        Value::Null,
    )?;
    Ok(report)
}

// ---------------------------------------------------------------- annotate

/// A timestamped document to annotate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub date: NaiveDate,
    pub text: String,
}

impl CorpusDoc {
    /// The explicit id, or a digest of (date, text).
    pub fn doc_id(&self) -> String {
        self.id.clone().unwrap_or_else(|| content_id(self.date, &self.text))
    }
}

pub fn content_id(date: NaiveDate, text: &str) -> String {
    let mut h = Sha256::new();
    h.update(date.to_string().as_bytes());
    h.update([0u8]);
    h.update(text.as_bytes());
    hex::encode(&h.finalize()[..8])
}

#[derive(Debug, Clone, PartialEq)]
pub enum CorpusFormat {
    /// One `{"id"?, "date", "text"}` object per line.
    Jsonl,
    Csv {
        id_column: Option<String>,
        date_column: String,
        text_column: String,
        date_format: String,
    },
}

/// A corpus row that could not be turned into a document.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectedRow {
    pub row: usize,
    pub message: String,
}

/// Parses a date, accepting a leading `YYYY-MM-DD` followed by a time part.
pub fn parse_day(s: &str, format: &str) -> Option<NaiveDate> {
    let s = s.trim();
    NaiveDate::parse_from_str(s, format)
        .ok()
        .or_else(|| s.get(..10).and_then(|d| NaiveDate::parse_from_str(d, "%Y-%m-%d").ok()))
}

pub fn read_corpus(path: &Path, format: &CorpusFormat) -> Result<(Vec<CorpusDoc>, Vec<RejectedRow>), CliError> {
    let mut docs = Vec::new();
    let mut rejected = Vec::new();
    let mut accept = |row: usize, doc: Result<CorpusDoc, String>| match doc {
        Ok(d) if d.text.trim().is_empty() => rejected.push(RejectedRow {
            row,
            message: "empty text".into(),
        }),
        Ok(d) => docs.push(d),
        Err(message) => rejected.push(RejectedRow { row, message }),
    };
    match format {
        CorpusFormat::Jsonl => {
            let file = File::open(path).map_err(|e| CliError::io(path, e))?;
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| CliError::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                accept(i + 1, serde_json::from_str::<CorpusDoc>(&line).map_err(|e| e.to_string()));
            }
        }
        CorpusFormat::Csv {
            id_column,
            date_column,
            text_column,
            date_format,
        } => {
            let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::io(path, e))?;
            let headers = reader.headers().map_err(|e| CliError::io(path, e))?.clone();
            let col = |name: &str| {
                headers
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| CliError::Argument(format!("{}: no column named {name:?}", path.display())))
            };
            let date_i = col(date_column)?;
            let text_i = col(text_column)?;
            let id_i = id_column.as_deref().map(col).transpose()?;
            for (i, record) in reader.records().enumerate() {
                let row = i + 2;
                let record = match record {
                    Ok(r) => r,
                    Err(e) => {
                        accept(row, Err(e.to_string()));
                        continue;
                    }
                };
                let date_raw = record.get(date_i).unwrap_or("");
                let doc = match parse_day(date_raw, date_format) {
                    None => Err(format!("unparseable date {date_raw:?}")),
                    Some(date) => Ok(CorpusDoc {
                        id: id_i.and_then(|k| record.get(k)).map(str::to_string).filter(|s| !s.is_empty()),
                        date,
                        text: record.get(text_i).unwrap_or("").to_string(),
                    }),
                };
                accept(row, doc);
            }
        }
    }
    Ok((docs, rejected))
}

#[derive(Debug, Clone)]
pub struct AnnotateArgs {
    pub program_path: PathBuf,
    pub corpus_path: PathBuf,
    pub corpus_format: CorpusFormat,
    pub kb_path: PathBuf,
    pub resume: bool,
    pub overwrite: bool,
    /// Timestamp stamped on new entries; the current time when absent.
    pub created_at: Option<DateTime<Utc>>,
    pub batch_size: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AnnotateOutcome {
    pub appended: usize,
    pub skipped: usize,
    pub failed: usize,
    pub rejected_rows: usize,
    pub failures_path: String,
}

pub fn failures_path(kb_path: &Path) -> PathBuf {
    let mut name = kb_path.file_name().unwrap_or_default().to_os_string();
    name.push(".failures.jsonl");
    kb_path.with_file_name(name)
}

pub fn cmd_annotate(args: &AnnotateArgs, client: &dyn ChatClient) -> Result<AnnotateOutcome, CliError> {
    let run = ManifestBuilder::start("annotate");
    let program = ProgramArtifact::load(&args.program_path)?;
    let (docs, rejected) = read_corpus(&args.corpus_path, &args.corpus_format)?;
    let mut store = KbStore::open(&args.kb_path)?;
    let sidecar_path = failures_path(&args.kb_path);
    let mut sidecar = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&sidecar_path)
        .map_err(|e| CliError::io(&sidecar_path, e))?;
    let mut log_failure = |record: Value| -> Result<(), CliError> {
        writeln!(sidecar, "{record}").map_err(|e| CliError::io(&sidecar_path, e))
    };
    for r in &rejected {
        warn!("corpus row {} rejected: {}", r.row, r.message);
        log_failure(json!({"kind": "rejected_row", "row": r.row, "message": r.message}))?;
    }

    let annotator = Annotator {
        model_name: client.config().model_name.clone(),
        shots: program.shots,
        cot: program.cot,
    };
    let model = program.data_model();
    let created_at = args.created_at.unwrap_or_else(Utc::now);
    let on_duplicate = if args.overwrite {
        OnDuplicate::Overwrite
    } else {
        OnDuplicate::Reject
    };
    let mut outcome = AnnotateOutcome {
        rejected_rows: rejected.len(),
        failures_path: sidecar_path.display().to_string(),
        ..Default::default()
    };

    let mut pending = Vec::new();
    for doc in &docs {
        let key = (doc.doc_id(), model, annotator.clone());
        if store.contains(&key) && !args.overwrite {
            outcome.skipped += 1;
            if !args.resume {
                let e = KbError::Duplicate {
                    doc_id: key.0.clone(),
                    data_model: model,
                    annotator: annotator.clone(),
                };
                log_failure(json!({"kind": "duplicate", "doc_id": key.0, "message": e.to_string()}))?;
            }
            continue;
        }
        pending.push(doc);
    }

    for chunk in pending.chunks(args.batch_size.max(1)) {
        let texts: Vec<&str> = chunk.iter().map(|d| d.text.as_str()).collect();
        let results = annotate_batch(&program, client, &texts);
        for (doc, result) in chunk.iter().zip(results) {
            let doc_id = doc.doc_id();
            match result {
                Ok(r) => {
                    let entry = KbEntry {
                        doc_id,
                        date: doc.date,
                        text: doc.text.clone(),
                        data_model: model,
                        annotator: annotator.clone(),
                        opinions: r.opinions,
                        warnings: r.warnings,
                        schema_version: SCHEMA_VERSION.to_string(),
                        created_at,
                    };
                    store.append(entry, on_duplicate)?;
                    outcome.appended += 1;
                }
                Err(AnnotateError::Client(e)) if matches!(e, ClientError::UnknownRequest { .. } | ClientError::InvalidConfig(_) | ClientError::Store { .. }) => {
                    return Err(e.into());
                }
                Err(e) => {
                    outcome.failed += 1;
                    warn!("document {doc_id} failed: {e}");
                    let attempts: Vec<String> = match &e {
                        AnnotateError::Marshal(m) => m.attempts().to_vec(),
                        AnnotateError::Client(_) => Vec::new(),
                    };
                    log_failure(json!({
                        "kind": "annotation_failure",
                        "doc_id": doc_id,
                        "message": e.to_string(),
                        "raw_attempts": attempts,
                    }))?;
                }
            }
        }
    }
    store.sync()?;
    info!(
        "annotated {} documents ({} skipped, {} failed, {} rows rejected)",
        outcome.appended, outcome.skipped, outcome.failed, outcome.rejected_rows
    );
    run.finish(
        json!({
            "model": client.config(),
            "resume": args.resume,
            "overwrite": args.overwrite,
            "created_at": args.created_at,
            "corpus_format": format!("{:?}", args.corpus_format),
        }),
        vec![],
        &[&args.program_path, &args.corpus_path],
        &[&args.kb_path, &sidecar_path],
        serde_json::to_value(&outcome).expect("serializable"),
    )?;
    Ok(outcome)
}

// ---------------------------------------------------------------- agree

#[derive(Debug, Clone)]
pub struct AgreeArgs {
    pub kb_a: PathBuf,
    pub kb_b: PathBuf,
    pub dataset: String,
    pub report_path: PathBuf,
}

/// Writes the JSON report to `report_path` and the text table next to it
/// (`.txt`).
pub fn cmd_agree(args: &AgreeArgs) -> Result<AgreementReport, CliError> {
    let run = ManifestBuilder::start("agree");
    let a = KbStore::read_all(&args.kb_a)?;
    let b = KbStore::read_all(&args.kb_b)?;
    let report = agreement_table(&args.dataset, &a, &b);
    for w in &report.warnings {
        warn!("{w}");
    }
    write_json(&args.report_path, &report)?;
    let table = render_table(std::slice::from_ref(&report));
    let table_path = args.report_path.with_extension("txt");
    fs::write(&table_path, &table).map_err(|e| CliError::io(&table_path, e))?;
    print!("{table}");
    run.finish(
        json!({ "dataset": args.dataset }),
        vec![],
        &[&args.kb_a, &args.kb_b],
        &[&args.report_path, &table_path],
        Value::Null,
    )?;
    Ok(report)
}

// ---------------------------------------------------------------- stats

#[derive(Debug, Clone)]
pub enum StatsSource {
    Kb { path: PathBuf, filter: KbFilter },
    /// Raw corpus, before annotation.
    Corpus { path: PathBuf, format: CorpusFormat },
}

pub fn cmd_stats(source: &StatsSource, json_out: Option<&Path>) -> Result<KbStats, CliError> {
    let run = ManifestBuilder::start("stats");
    let (s, input) = match source {
        StatsSource::Kb { path, filter } => (stats(&KbStore::read_all(path)?, filter)?, path),
        StatsSource::Corpus { path, format } => {
            let (docs, rejected) = read_corpus(path, format)?;
            if !rejected.is_empty() {
                warn!("{} corpus rows rejected", rejected.len());
            }
            // rows without an id are distinct documents even when their text repeats
            let ids: Vec<String> = docs
                .iter()
                .enumerate()
                .map(|(i, d)| d.id.clone().unwrap_or_else(|| format!("row-{i}")))
                .collect();
            let s = document_stats(docs.iter().zip(&ids).map(|(d, id)| (id.as_str(), d.date, d.text.as_str())))?;
            (s, path)
        }
    };
    print!("{s}");
    if let Some(out) = json_out {
        write_json(out, &s)?;
        run.finish(Value::Null, vec![], &[input], &[out], Value::Null)?;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn content_ids_are_stable() {
        let d = NaiveDate::from_ymd_opt(2008, 6, 11).unwrap();
        assert_eq!(content_id(d, "x"), content_id(d, "x"));
        assert_ne!(content_id(d, "x"), content_id(d, "y"));
        assert_eq!(content_id(d, "x").len(), 16);
    }

    #[test]
    fn day_parsing() {
        let d = NaiveDate::from_ymd_opt(2020, 1, 21).unwrap();
        assert_eq!(parse_day("2020-01-21", "%Y-%m-%d"), Some(d));
        assert_eq!(parse_day("2020-01-21 09:30:00", "%Y-%m-%d"), Some(d));
        assert_eq!(parse_day("01/21/2020", "%m/%d/%Y"), Some(d));
        assert_eq!(parse_day("yesterday", "%Y-%m-%d"), None);
    }

    #[test]
    fn exit_codes_are_distinct() {
        let codes = [
            CliError::Argument(String::new()).exit_code(),
            CliError::Io {
                path: String::new(),
                message: String::new(),
            }
            .exit_code(),
            CliError::Client(ClientError::EmptyResponse).exit_code(),
            CliError::Optimizer(PipelineError::OverlappingSamples(vec![])).exit_code(),
        ];
        let mut sorted = codes.to_vec();
        sorted.dedup();
        assert_eq!(sorted.len(), 4);
        assert!(codes.iter().all(|&c| c != 0));
    }

    #[test]
    fn config_file_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.conf");
        fs::write(&p, "# model settings\nmodel = \"m\"\nmax-tokens=512 # inline\n\n").unwrap();
        let c = read_config_file(&p).unwrap();
        assert_eq!(c["model"], "m");
        assert_eq!(c["max_tokens"], "512");
        fs::write(&p, "oops").unwrap();
        assert!(matches!(read_config_file(&p), Err(CliError::Argument(_))));
    }
}
