use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};

use opinion_kb::cli::{
    build_client, cmd_agree, cmd_annotate, cmd_evaluate, cmd_sample, cmd_stats, cmd_train, read_config_file,
    AgreeArgs, AnnotateArgs, ClientSpec, CliError, CorpusFormat, EvaluateArgs, SampleArgs, StatsSource, TrainArgs,
};
use opinion_kb::kb::KbFilter;
use opinion_kb::pipeline::OptimizerBudget;
use opinion_kb::sampler::SampleMode;
use opinion_kb::{DataModel, ModelConfig, ProgramArtifact};

#[derive(Parser)]
#[command(name = "opinionkb", version, about = "Structured opinion extraction and knowledge-base building")]
struct Cli {
    /// `key = value` file supplying defaults for model settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a density-aware train or test sample from annotated data.
    Sample(SampleCmd),
    /// Optimize a prompt program on a train sample.
    Train(TrainCmd),
    /// Score a program on a test sample.
    Evaluate(EvaluateCmd),
    /// Annotate a timestamped corpus into a knowledge base.
    Annotate(AnnotateCmd),
    /// Concept-level agreement between two knowledge bases.
    Agree(AgreeCmd),
    /// Coverage statistics for a knowledge base or raw corpus.
    Stats(StatsCmd),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Train,
    Test,
}

#[derive(Args)]
struct SampleCmd {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum)]
    mode: ModeArg,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.5)]
    cap_factor: f64,
    /// Additional splits pooled into the density profile.
    #[arg(long = "profile-from")]
    profile_from: Vec<PathBuf>,
    /// Use this outlier bound instead of the computed one.
    #[arg(long)]
    upper_bound: Option<f64>,
}

#[derive(Args, Default)]
struct ModelFlags {
    #[arg(long)]
    base_url: Option<String>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    max_tokens: Option<u32>,
    #[arg(long)]
    timeout_secs: Option<u64>,
    #[arg(long)]
    max_retries: Option<u32>,
    #[arg(long)]
    max_in_flight: Option<usize>,
    /// Serve completions only from this exchange store.
    #[arg(long, conflicts_with = "record")]
    replay: Option<PathBuf>,
    /// Append live exchanges to this store.
    #[arg(long)]
    record: Option<PathBuf>,
    /// Per-attempt request log.
    #[arg(long)]
    audit_log: Option<PathBuf>,
}

#[derive(Args)]
struct TrainCmd {
    #[arg(long)]
    data_model: DataModel,
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    eval: PathBuf,
    #[arg(long, default_value_t = 5)]
    shots: usize,
    #[arg(long)]
    cot: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    instruction_candidates: Option<usize>,
    #[arg(long)]
    bootstrap_threshold: Option<f64>,
    #[arg(long)]
    propose_instructions: bool,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    model: ModelFlags,
}

#[derive(Args)]
struct EvaluateCmd {
    #[arg(long)]
    program: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    report: PathBuf,
    #[command(flatten)]
    model: ModelFlags,
}

#[derive(Args)]
struct CorpusFlags {
    /// Corpus file: JSONL by default, CSV with `--csv`.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    csv: bool,
    #[arg(long, default_value = "date")]
    date_column: String,
    #[arg(long, default_value = "text")]
    text_column: String,
    #[arg(long)]
    id_column: Option<String>,
    #[arg(long, default_value = "%Y-%m-%d")]
    date_format: String,
}

impl CorpusFlags {
    fn format(&self) -> CorpusFormat {
        if self.csv {
            CorpusFormat::Csv {
                id_column: self.id_column.clone(),
                date_column: self.date_column.clone(),
                text_column: self.text_column.clone(),
                date_format: self.date_format.clone(),
            }
        } else {
            CorpusFormat::Jsonl
        }
    }
}

#[derive(Args)]
struct AnnotateCmd {
    #[arg(long)]
    program: PathBuf,
    #[command(flatten)]
    corpus: CorpusFlags,
    #[arg(long)]
    kb: PathBuf,
    /// Skip documents already in the knowledge base.
    #[arg(long, conflicts_with = "overwrite")]
    resume: bool,
    /// Replace existing entries for the same document and annotator.
    #[arg(long)]
    overwrite: bool,
    /// Fixed creation timestamp (RFC 3339) for reproducible output.
    #[arg(long)]
    created_at: Option<DateTime<Utc>>,
    #[arg(long, default_value_t = 64)]
    batch_size: usize,
    #[command(flatten)]
    model: ModelFlags,
}

#[derive(Args)]
struct AgreeCmd {
    #[arg(long)]
    kb_a: PathBuf,
    #[arg(long)]
    kb_b: PathBuf,
    #[arg(long, default_value = "corpus")]
    dataset: String,
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args)]
struct StatsCmd {
    #[arg(long, required_unless_present = "corpus")]
    kb: Option<PathBuf>,
    #[arg(long)]
    data_model: Option<DataModel>,
    /// Statistics over a raw corpus instead of a knowledge base.
    #[arg(long, conflicts_with = "kb")]
    corpus: Option<PathBuf>,
    #[arg(long)]
    csv: bool,
    #[arg(long, default_value = "date")]
    date_column: String,
    #[arg(long, default_value = "text")]
    text_column: String,
    #[arg(long)]
    id_column: Option<String>,
    #[arg(long, default_value = "%Y-%m-%d")]
    date_format: String,
    #[arg(long)]
    json: Option<PathBuf>,
}

fn setting<T: FromStr>(file: &HashMap<String, String>, key: &str) -> Result<Option<T>, CliError> {
    file.get(key)
        .map(|v| {
            v.parse()
                .map_err(|_| CliError::Argument(format!("config key {key}: cannot parse {v:?}")))
        })
        .transpose()
}

/// Flag, then config file, then `base`.
fn client_spec(flags: &ModelFlags, file: &HashMap<String, String>, base: ModelConfig) -> Result<ClientSpec, CliError> {
    let mut m = base;
    macro_rules! merge {
        ($field:ident, $flag:ident, $key:literal) => {
            if let Some(v) = flags.$flag.clone().map(|v| Ok(Some(v))).unwrap_or_else(|| setting(file, $key))? {
                m.$field = v;
            }
        };
    }
    merge!(base_url, base_url, "base_url");
    merge!(model_name, model, "model");
    merge!(temperature, temperature, "temperature");
    merge!(max_output_tokens, max_tokens, "max_tokens");
    merge!(timeout_secs, timeout_secs, "timeout_secs");
    merge!(max_retries, max_retries, "max_retries");
    merge!(max_in_flight, max_in_flight, "max_in_flight");
    let path = |flag: &Option<PathBuf>, key: &str| flag.clone().or_else(|| file.get(key).map(PathBuf::from));
    Ok(ClientSpec {
        model: m,
        replay: path(&flags.replay, "replay"),
        record: path(&flags.record, "record"),
        audit_log: path(&flags.audit_log, "audit_log"),
    })
}

fn artifact_model(program: &Path) -> Result<ModelConfig, CliError> {
    Ok(ProgramArtifact::load(program)?.model_config)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(p) => read_config_file(p)?,
        None => HashMap::new(),
    };
    match cli.command {
        Command::Sample(c) => {
            let m = cmd_sample(&SampleArgs {
                input: c.input,
                profile_from: c.profile_from,
                output: c.output,
                mode: match c.mode {
                    ModeArg::Train => SampleMode::TrainEqual,
                    ModeArg::Test => SampleMode::TestDensity,
                },
                target_n: c.n,
                seed: c.seed,
                cap_factor: c.cap_factor,
                upper_bound: c.upper_bound,
            })?;
            println!(
                "sampled {} of {} inliers (bound {}, {} excluded)",
                m.plan.total(),
                m.inliers,
                m.upper_bound,
                m.excluded
            );
        }
        Command::Train(c) => {
            let spec = client_spec(&c.model, &file, ModelConfig::default())?;
            let client = build_client(&spec)?;
            let defaults = OptimizerBudget::default();
            let budget = OptimizerBudget {
                instruction_candidates: c.instruction_candidates.unwrap_or(defaults.instruction_candidates),
                trials: c.trials.unwrap_or(defaults.trials),
                bootstrap_threshold: c.bootstrap_threshold.unwrap_or(defaults.bootstrap_threshold),
                seed: c.seed,
                propose_instructions_with_llm: c.propose_instructions,
            };
            cmd_train(
                &TrainArgs {
                    data_model: c.data_model,
                    train_path: c.train,
                    eval_path: c.eval,
                    shots: c.shots,
                    cot: c.cot,
                    budget,
                    out_path: c.out,
                },
                client.as_ref(),
            )?;
        }
        Command::Evaluate(c) => {
            let spec = client_spec(&c.model, &file, artifact_model(&c.program)?)?;
            let client = build_client(&spec)?;
            cmd_evaluate(
                &EvaluateArgs {
                    program_path: c.program,
                    test_path: c.test,
                    report_path: c.report,
                },
                client.as_ref(),
            )?;
        }
        Command::Annotate(c) => {
            let spec = client_spec(&c.model, &file, artifact_model(&c.program)?)?;
            let client = build_client(&spec)?;
            let outcome = cmd_annotate(
                &AnnotateArgs {
                    program_path: c.program,
                    corpus_format: c.corpus.format(),
                    corpus_path: c.corpus.corpus,
                    kb_path: c.kb,
                    resume: c.resume,
                    overwrite: c.overwrite,
                    created_at: c.created_at,
                    batch_size: c.batch_size,
                },
                client.as_ref(),
            )?;
            println!(
                "appended {}, skipped {}, failed {}, rejected rows {} (details in {})",
                outcome.appended, outcome.skipped, outcome.failed, outcome.rejected_rows, outcome.failures_path
            );
        }
        Command::Agree(c) => {
            cmd_agree(&AgreeArgs {
                kb_a: c.kb_a,
                kb_b: c.kb_b,
                dataset: c.dataset,
                report_path: c.report,
            })?;
        }
        Command::Stats(c) => {
            let source = match (c.kb, c.corpus) {
                (_, Some(path)) => StatsSource::Corpus {
                    path,
                    format: CorpusFlags {
                        corpus: PathBuf::new(),
                        csv: c.csv,
                        date_column: c.date_column,
                        text_column: c.text_column,
                        id_column: c.id_column,
                        date_format: c.date_format,
                    }
                    .format(),
                },
                (Some(path), None) => StatsSource::Kb {
                    path,
                    filter: KbFilter {
                        data_model: c.data_model,
                        annotator: None,
                    },
                },
                (None, None) => return Err(CliError::Argument("either --kb or --corpus is required".into())),
            };
            cmd_stats(&source, c.json.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
