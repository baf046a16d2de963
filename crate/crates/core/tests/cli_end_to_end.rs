mod common;

use std::fs;
use std::process::Command;

use common::*;
use opinion_kb::cli::{
    cmd_agree, cmd_annotate, cmd_stats, failures_path, manifest_path, AgreeArgs, AnnotateArgs, CorpusFormat,
    RunManifest, StatsSource,
};
use opinion_kb::kb::{KbFilter, KbStore};
use opinion_kb::llm::{RecordingClient, ReplayClient};
use opinion_kb::{DataModel, ModelConfig};

#[test]
fn record_then_replay_is_byte_identical() {
    let root = tempfile::tempdir().unwrap();
    let store = root.path().join("exchanges.jsonl");
    let recorded = root.path().join("record");
    fs::create_dir(&recorded).unwrap();
    let recorder = RecordingClient::open(simulated_for_fixtures(), &store).unwrap();
    let first = run_end_to_end(&recorded, &recorder);

    let replay = ReplayClient::open(&store, ModelConfig::default()).unwrap();
    let again = root.path().join("replay");
    fs::create_dir(&again).unwrap();
    let second = run_end_to_end(&again, &replay);
    for (a, b) in [(&first.program, &second.program), (&first.report, &second.report), (&first.kb, &second.kb)] {
        assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap(), "{}", a.display());
    }

    let manifest: RunManifest = serde_json::from_str(&fs::read_to_string(manifest_path(&first.program)).unwrap()).unwrap();
    assert_eq!(manifest.command, "train");
    assert_eq!(manifest.seeds, vec![11]);
    assert_eq!(manifest.inputs.len(), 2);

    let kb = KbStore::read_all(&first.kb).unwrap();
    assert_eq!(kb.len(), 50);
    assert!(kb.iter().all(|e| e.created_at == created_at()));
}

#[test]
fn annotate_resumes_and_logs_bad_rows() {
    let dir = tempfile::tempdir().unwrap();
    let client = simulated_for_fixtures();
    let program = dir.path().join("program.json");
    opinion_kb::ProgramArtifact::zero_shot(
        opinion_kb::Signature::for_model(DataModel::Ssa),
        ModelConfig::default(),
        false,
    )
    .save(&program)
    .unwrap();
    let kb = dir.path().join("kb.jsonl");
    let args = AnnotateArgs {
        program_path: program,
        corpus_path: fixture("corpus_with_bad_rows.csv"),
        corpus_format: CorpusFormat::Csv {
            id_column: Some("post_id".into()),
            date_column: "created".into(),
            text_column: "body".into(),
            date_format: "%Y-%m-%d".into(),
        },
        kb_path: kb.clone(),
        resume: true,
        overwrite: false,
        created_at: Some(created_at()),
        batch_size: 4,
    };
    let first = cmd_annotate(&args, &client).unwrap();
    assert_eq!(first.rejected_rows, 2);
    assert_eq!(first.appended + first.failed, 10);
    let second = cmd_annotate(&args, &client).unwrap();
    assert_eq!(second.appended, first.failed);
    assert_eq!(second.skipped, first.appended);

    let failures = fs::read_to_string(failures_path(&kb)).unwrap();
    assert!(failures.lines().filter(|l| l.contains("rejected_row")).count() >= 2);

    let stats = cmd_stats(
        &StatsSource::Kb {
            path: kb.clone(),
            filter: KbFilter::default(),
        },
        None,
    )
    .unwrap();
    assert_eq!(stats.total, KbStore::read_all(&kb).unwrap().len());
}

#[test]
fn agree_writes_report_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("x.jsonl");
    let client = RecordingClient::open(simulated_for_fixtures(), &store).unwrap();
    let out = run_end_to_end(dir.path(), &client);
    let report = dir.path().join("agreement.json");
    let r = cmd_agree(&AgreeArgs {
        kb_a: out.kb.clone(),
        kb_b: out.kb.clone(),
        dataset: "politifact".into(),
        report_path: report.clone(),
    })
    .unwrap();
    assert_eq!(r.cell(DataModel::Ssa, opinion_kb::ConceptName::Target), Some(100.0));
    assert!(report.exists());
    assert!(report.with_extension("txt").exists());
}

#[test]
fn binary_reports_stats_and_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_opinionkb");
    let out = Command::new(bin)
        .args(["stats", "--corpus"])
        .arg(fixture("corpus.jsonl"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("Daily Median"), "{stdout}");
    assert!(stdout.contains("2008-06-11"), "{stdout}");

    let missing = Command::new(bin).args(["stats", "--kb", "/nonexistent/dir/kb.jsonl"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(3));
    let bad_args = Command::new(bin).args(["sample", "--mode", "sideways"]).output().unwrap();
    assert_eq!(bad_args.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("s.jsonl");
    let sample = Command::new(bin)
        .args(["sample", "--mode", "train", "--n", "12", "--seed", "3", "--input"])
        .arg(fixture("ssa_docs.jsonl"))
        .arg("--output")
        .arg(&out_path)
        .output()
        .unwrap();
    assert!(sample.status.success(), "{}", String::from_utf8_lossy(&sample.stderr));
    assert_eq!(fs::read_to_string(&out_path).unwrap().lines().count(), 12);
    assert!(manifest_path(&out_path).exists());

    let replay_missing = Command::new(bin)
        .args(["evaluate", "--program", "/nonexistent.json", "--test", "x", "--report", "y"])
        .output()
        .unwrap();
    assert_eq!(replay_missing.status.code(), Some(3));
}
