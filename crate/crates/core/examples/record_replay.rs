//! Records chat exchanges to a store and answers the same requests offline.

use opinion_kb::llm::{request_digest, RecordingClient, ReplayClient, ScriptedClient};
use opinion_kb::{annotate_one, ChatClient, DataModel, ModelConfig, ProgramArtifact, Signature};

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let store = dir.path().join("exchanges.jsonl");
    let config = ModelConfig::default();
    let program = ProgramArtifact::zero_shot(Signature::for_model(DataModel::Ssa), config.clone(), false);
    let text = "The mayor praised the new bike lanes.";

    let live = ScriptedClient::new(config.clone(), |_| {
        Ok("[{'holder': 'The mayor', 'target': 'the new bike lanes', \
            'sentiment': {'polarity': 'positive', 'expression': 'praised', 'intensity': 'average'}}]"
            .into())
    });
    let recorder = RecordingClient::open(live, &store).unwrap();
    let recorded = annotate_one(&program, &recorder, text).unwrap();
    drop(recorder);

    let replay = ReplayClient::open(&store, config.clone()).unwrap();
    let replayed = annotate_one(&program, &replay, text).unwrap();
    assert_eq!(recorded, replayed);
    println!("{} exchange(s) recorded; replay matches: {:?}", replay.len(), replayed.opinions);

    let prompt = opinion_kb::pipeline::synthesize_prompt(&program, "An unseen text.");
    println!("unseen request {} -> {:?}", &request_digest(&config.model_name, &prompt)[..12], replay.complete(&prompt).err());
}
