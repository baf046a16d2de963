//! Building a temporal opinion knowledge base with LLM annotators.
//!
//! The crate covers the whole annotation workflow:
//!
//! - [`schema`]: the SSA, ACOS and UOC opinion data models and their
//!   flattened leaf components.
//! - [`marshal`]: turning raw completions into validated opinions, with a
//!   bounded repair loop.
//! - [`metric`]: component-level exact match with optimal one-to-one
//!   alignment, and corpus precision/recall/F1.
//! - [`sampler`]: IQR density bounds, outlier exclusion and stratified
//!   sampling of annotated data.
//! - [`llm`]: OpenAI-compatible chat completions plus record/replay clients.
//! - [`pipeline`]: signatures, prompt synthesis, demonstration bootstrapping
//!   and configuration search.
//! - [`agreement`]: per-concept F1 between two annotators.
//! - [`kb`]: the append-only, date-indexed knowledge base.
//! - [`cli`]: the commands behind the `opinionkb` binary.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod agreement;
pub mod assignment;
pub mod cli;
pub mod dataset;
pub mod kb;
pub mod literal;
pub mod llm;
pub mod marshal;
pub mod metric;
pub mod pipeline;
pub mod sampler;
pub mod schema;

pub use agreement::{agreement_table, AgreementReport, ConceptName};
pub use dataset::AnnotatedInstance;
pub use kb::{KbEntry, KbStore};
pub use llm::{ChatClient, ChatMessage, ModelConfig};
pub use marshal::{marshal, MarshalResult};
pub use metric::{align, corpus_metric, overlap, EvalInstance, MetricReport};
pub use pipeline::{annotate_one, optimize, ProgramArtifact, Signature};
pub use schema::{DataModel, OpinionRecord};
