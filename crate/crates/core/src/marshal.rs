//! Turns raw completion text into validated opinion lists, with a bounded
//! repair loop for outputs that do not parse.

use std::collections::HashSet;
use std::error::Error as StdError;

use log::{debug, warn};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::literal::{LiteralError, Parser};
use crate::schema::{leaf_values, normalize, parse_opinion, ComponentKind, DataModelSchema, OpinionRecord, SchemaError};

/// Default cap on opinions per instance; matches the sampler's combined
/// density bound.
pub const DEFAULT_MAX_OPINIONS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarshalError {
    #[error("no structured payload found in completion")]
    PayloadMissing { raw: String },
    #[error("malformed payload: {0}")]
    Parse(#[from] LiteralError),
    #[error("payload must be a list of opinion objects, found {0}")]
    NotAList(String),
    #[error("opinion {index}: {source}")]
    Element { index: usize, source: SchemaError },
}

#[derive(Debug, Error)]
pub enum MarshalFailure {
    #[error("marshalling failed after {} attempt(s): {last}", attempts.len())]
    Exhausted {
        attempts: Vec<String>,
        last: MarshalError,
    },
    #[error("repair request failed after {} attempt(s): {source}", attempts.len())]
    Reprompt {
        attempts: Vec<String>,
        source: Box<dyn StdError + Send + Sync>,
    },
}

impl MarshalFailure {
    /// Every raw completion seen, in order.
    pub fn attempts(&self) -> &[String] {
        match self {
            MarshalFailure::Exhausted { attempts, .. } | MarshalFailure::Reprompt { attempts, .. } => attempts,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepairStrategy {
    RepromptWithError,
    TruncateToValidPrefix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairPolicy {
    /// Repair attempts after the first call.
    pub max_attempts: usize,
    pub strategy: RepairStrategy,
}

impl Default for RepairPolicy {
    fn default() -> Self {
        RepairPolicy {
            max_attempts: 2,
            strategy: RepairStrategy::RepromptWithError,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarshalConfig {
    pub repair: RepairPolicy,
    pub max_opinions: usize,
}

impl Default for MarshalConfig {
    fn default() -> Self {
        MarshalConfig {
            repair: RepairPolicy::default(),
            max_opinions: DEFAULT_MAX_OPINIONS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarningKind {
    SpanNotInText,
    /// Exact duplicate (identical leaf values) dropped.
    Duplicate,
    /// Dropped because the instance exceeded the opinion cap.
    ExcessTruncated,
    /// Payload was cut back to its valid prefix.
    PrefixTruncated,
}

/// For `SpanNotInText` the index refers to the returned opinions; for the
/// dropping kinds it refers to the element position in the payload.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MarshalWarning {
    pub opinion: usize,
    pub component: Option<String>,
    pub kind: WarningKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarshalResult {
    pub opinions: Vec<OpinionRecord>,
    pub warnings: Vec<MarshalWarning>,
    pub attempts_used: usize,
}

const ANSWER_MARKERS: &[&str] = &["final answer:", "answer:", "output:", "annotations:", "```json"];

/// Finds and parses the structured payload in `raw`. A single object is
/// wrapped in a one-element list.
pub fn extract_payload(raw: &str, cot_enabled: bool) -> Result<Vec<Value>, MarshalError> {
    if cot_enabled {
        let lowered = raw.to_lowercase();
        // Only the lowercase form is searched; ASCII markers keep byte offsets aligned.
        let after_marker = ANSWER_MARKERS
            .iter()
            .filter_map(|m| lowered.rfind(m).map(|i| i + m.len()))
            .max();
        if let Some(start) = after_marker {
            if let Ok(v) = scan(raw, start) {
                return Ok(v);
            }
        }
    }
    scan(raw, 0)
}

fn scan(raw: &str, from: usize) -> Result<Vec<Value>, MarshalError> {
    let mut furthest: Option<LiteralError> = None;
    let candidates = raw[from..]
        .char_indices()
        .filter(|(_, c)| *c == '[' || *c == '{')
        .map(|(i, _)| i + from);
    // candidates nested inside a value that already failed are skipped, so a
    // cut-off list is not mistaken for its first complete element
    let mut skip_until = 0;
    for start in candidates {
        if start < skip_until {
            continue;
        }
        let mut p = Parser::at(raw, start);
        match p.parse_value() {
            Ok(v) => return into_list(v),
            Err(e) => {
                skip_until = e.position;
                if furthest.as_ref().is_none_or(|f| e.position > f.position) {
                    furthest = Some(e);
                }
            }
        }
    }
    match furthest {
        Some(e) => Err(MarshalError::Parse(e)),
        None => Err(MarshalError::PayloadMissing {
            raw: raw.to_string(),
        }),
    }
}

fn into_list(v: Value) -> Result<Vec<Value>, MarshalError> {
    match v {
        Value::Array(items) => Ok(items),
        // {"opinions": [...]} style wrappers
        Value::Object(m) if m.len() == 1 && m.values().all(Value::is_array) => {
            match m.into_iter().next() {
                Some((_, Value::Array(items))) => Ok(items),
                _ => unreachable!(),
            }
        }
        obj @ Value::Object(_) => Ok(vec![obj]),
        other => Err(MarshalError::NotAList(other.to_string())),
    }
}

fn parse_all(items: &[Value], schema: &DataModelSchema) -> Result<Vec<OpinionRecord>, MarshalError> {
    items
        .iter()
        .enumerate()
        .map(|(index, v)| parse_opinion(v, schema).map_err(|source| MarshalError::Element { index, source }))
        .collect()
}

/// Longest valid prefix of the payload, used by the truncation strategy.
fn valid_prefix(raw: &str, cot: bool, schema: &DataModelSchema) -> Vec<OpinionRecord> {
    let items = match extract_payload(raw, cot) {
        Ok(items) => items,
        Err(_) => match raw.find('[') {
            Some(start) => Parser::at(raw, start).parse_array_prefix().0,
            None => Vec::new(),
        },
    };
    items
        .iter()
        .map_while(|v| parse_opinion(v, schema).ok())
        .collect()
}

fn finish(
    parsed: Vec<OpinionRecord>,
    schema: &DataModelSchema,
    source_text: &str,
    max_opinions: usize,
    mut warnings: Vec<MarshalWarning>,
    attempts_used: usize,
) -> MarshalResult {
    let mut seen = HashSet::new();
    let mut opinions = Vec::new();
    for (i, op) in parsed.into_iter().enumerate() {
        let leaves = leaf_values(&op, schema).expect("parsed under this schema");
        if !seen.insert(leaves) {
            warnings.push(MarshalWarning {
                opinion: i,
                component: None,
                kind: WarningKind::Duplicate,
            });
            continue;
        }
        if opinions.len() == max_opinions {
            warnings.push(MarshalWarning {
                opinion: i,
                component: None,
                kind: WarningKind::ExcessTruncated,
            });
            continue;
        }
        opinions.push(op);
    }
    let haystack = normalize(source_text);
    for (i, op) in opinions.iter().enumerate() {
        let leaves = leaf_values(op, schema).expect("parsed under this schema");
        for (component, value) in schema.leaf_components.iter().zip(&leaves) {
            if component.kind != ComponentKind::Span {
                continue;
            }
            if let Some(v) = value {
                if !haystack.contains(v.as_str()) {
                    warnings.push(MarshalWarning {
                        opinion: i,
                        component: Some(component.name.to_string()),
                        kind: WarningKind::SpanNotInText,
                    });
                }
            }
        }
    }
    MarshalResult {
        opinions,
        warnings,
        attempts_used,
    }
}

/// Marshals a completion into opinions under `schema`.
///
/// On a parse failure the repair loop runs: with `RepromptWithError` the
/// `reprompt` callback receives the failed text and the error and returns a
/// new completion, up to `max_attempts` times; with `TruncateToValidPrefix`
/// the leading valid opinions are kept instead.
pub fn marshal<F, E>(
    raw: &str,
    schema: &DataModelSchema,
    source_text: &str,
    config: &MarshalConfig,
    cot_enabled: bool,
    mut reprompt: F,
) -> Result<MarshalResult, MarshalFailure>
where
    F: FnMut(&str, &MarshalError) -> Result<String, E>,
    E: Into<Box<dyn StdError + Send + Sync>>,
{
    let mut attempts = vec![raw.to_string()];
    loop {
        let current = attempts.last().expect("non-empty").as_str();
        let error = match extract_payload(current, cot_enabled).and_then(|items| parse_all(&items, schema)) {
            Ok(parsed) => {
                return Ok(finish(
                    parsed,
                    schema,
                    source_text,
                    config.max_opinions,
                    Vec::new(),
                    attempts.len(),
                ))
            }
            Err(e) => e,
        };
        debug!("marshal attempt {} failed: {error}", attempts.len());
        match config.repair.strategy {
            RepairStrategy::TruncateToValidPrefix => {
                let prefix = valid_prefix(current, cot_enabled, schema);
                if prefix.is_empty() {
                    return Err(MarshalFailure::Exhausted { attempts, last: error });
                }
                let cut = MarshalWarning {
                    opinion: prefix.len(),
                    component: None,
                    kind: WarningKind::PrefixTruncated,
                };
                return Ok(finish(
                    prefix,
                    schema,
                    source_text,
                    config.max_opinions,
                    vec![cut],
                    attempts.len(),
                ));
            }
            RepairStrategy::RepromptWithError => {
                if attempts.len() > config.repair.max_attempts {
                    warn!("giving up after {} attempts: {error}", attempts.len());
                    return Err(MarshalFailure::Exhausted { attempts, last: error });
                }
                match reprompt(current, &error) {
                    Ok(next) => attempts.push(next),
                    Err(e) => {
                        return Err(MarshalFailure::Reprompt {
                            attempts,
                            source: e.into(),
                        })
                    }
                }
            }
        }
    }
}

/// Marshals without a repair channel (repairs that need a reprompt fail).
pub fn marshal_once(
    raw: &str,
    schema: &DataModelSchema,
    source_text: &str,
    config: &MarshalConfig,
    cot_enabled: bool,
) -> Result<MarshalResult, MarshalFailure> {
    let config = MarshalConfig {
        repair: RepairPolicy {
            max_attempts: 0,
            ..config.repair
        },
        ..*config
    };
    marshal(raw, schema, source_text, &config, cot_enabled, |_, _| {
        Err::<String, _>("no reprompt channel")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::DataModel;

    const TEXT: &str = "John McCain opposed bankruptcy protections for families.";

    fn no_reprompt(_: &str, _: &MarshalError) -> Result<String, std::io::Error> {
        panic!("reprompt not expected")
    }

    #[test]
    fn cot_preamble_is_skipped() {
        let raw = "Reasoning: the speaker dislikes [the law]. Answer: [{'sentiment': {'polarity': 'negative', 'expression': 'opposed'}, 'target': 'bankruptcy protections', 'holder': 'John McCain'}]";
        let items = extract_payload(raw, true).unwrap();
        assert_eq!(items.len(), 1);
        // without CoT the scan still skips the non-literal bracket
        assert_eq!(extract_payload(raw, false).unwrap().len(), 1);
    }

    #[test]
    fn empty_list_and_single_object() {
        assert!(extract_payload("[]", false).unwrap().is_empty());
        let items = extract_payload("here: {\"a\": 1}", false).unwrap();
        assert_eq!(items.len(), 1);
        let items = extract_payload("{\"opinions\": [{\"a\": 1}, {\"b\": 2}]}", false).unwrap();
        assert_eq!(items.len(), 2);
    }

    #[test]
    fn missing_and_malformed_payloads() {
        assert!(matches!(
            extract_payload("I cannot find any opinions.", false),
            Err(MarshalError::PayloadMissing { raw }) if raw.starts_with("I cannot")
        ));
        assert!(matches!(
            extract_payload("[{\"a\": 1,, }]", false),
            Err(MarshalError::Parse(e)) if e.position > 0
        ));
    }

    #[test]
    fn clean_payload_uses_one_attempt() {
        let raw = r#"[{"sentiment": {"polarity": "negative", "expression": "opposed", "intensity": "average"}, "target": "bankruptcy protections", "holder": "John McCain"}]"#;
        let r = marshal(raw, DataModel::Ssa.schema(), TEXT, &MarshalConfig::default(), false, no_reprompt).unwrap();
        assert_eq!(r.attempts_used, 1);
        assert!(r.warnings.is_empty());
        assert_eq!(r.opinions.len(), 1);
    }

    #[test]
    fn hallucinated_holder_is_kept_with_warning() {
        let raw = r#"[{"sentiment": {"polarity": "negative", "expression": "opposed"}, "target": "bankruptcy protections", "holder": "the reviewer"}]"#;
        let r = marshal(raw, DataModel::Ssa.schema(), TEXT, &MarshalConfig::default(), false, no_reprompt).unwrap();
        assert_eq!(r.opinions.len(), 1);
        assert_eq!(
            r.warnings,
            vec![MarshalWarning {
                opinion: 0,
                component: Some("holder".into()),
                kind: WarningKind::SpanNotInText
            }]
        );
    }

    #[test]
    fn duplicates_and_excess_are_dropped() {
        let one = r#"{"sentiment": {"polarity": "negative", "expression": "opposed"}, "target": "bankruptcy protections"}"#;
        let other = |t: &str| format!(r#"{{"sentiment": {{"polarity": "neutral"}}, "target": "{t}"}}"#);
        let raw = format!(
            "[{one}, {one}, {}, {}, {}, {}]",
            other("families"),
            other("john"),
            other("protections"),
            other("bankruptcy")
        );
        let r = marshal(&raw, DataModel::Ssa.schema(), TEXT, &MarshalConfig::default(), false, no_reprompt).unwrap();
        assert_eq!(r.opinions.len(), 4);
        let kinds: Vec<_> = r.warnings.iter().map(|w| (w.opinion, w.kind)).collect();
        assert_eq!(kinds, vec![(1, WarningKind::Duplicate), (5, WarningKind::ExcessTruncated)]);
    }

    #[test]
    fn reprompt_repairs_then_exhausts() {
        let good = r#"[{"sentiment": {"polarity": "negative"}, "target": "families"}]"#;
        let mut calls = 0;
        let r = marshal("[{broken", DataModel::Ssa.schema(), TEXT, &MarshalConfig::default(), false, |raw, err| {
            calls += 1;
            assert_eq!(raw, "[{broken");
            assert!(matches!(err, MarshalError::Parse(_)));
            Ok::<_, std::io::Error>(good.to_string())
        })
        .unwrap();
        assert_eq!((r.attempts_used, calls), (2, 1));

        let err = marshal("nothing", DataModel::Ssa.schema(), TEXT, &MarshalConfig::default(), false, |_, _| {
            Ok::<_, std::io::Error>("still nothing".to_string())
        })
        .unwrap_err();
        assert_eq!(err.attempts().len(), 3);
        assert!(matches!(err, MarshalFailure::Exhausted { last: MarshalError::PayloadMissing { .. }, .. }));
    }

    #[test]
    fn truncate_strategy_keeps_valid_prefix() {
        let config = MarshalConfig {
            repair: RepairPolicy {
                max_attempts: 2,
                strategy: RepairStrategy::TruncateToValidPrefix,
            },
            ..Default::default()
        };
        let raw = r#"[{"sentiment": {"polarity": "negative"}, "target": "families"}, {"sentiment": {"polarity": "angry"}, "target": "x"}]"#;
        let r = marshal(raw, DataModel::Ssa.schema(), TEXT, &config, false, no_reprompt).unwrap();
        assert_eq!(r.opinions.len(), 1);
        assert_eq!(r.warnings[0].kind, WarningKind::PrefixTruncated);

        let raw = r#"[{"sentiment": {"polarity": "negative"}, "target": "families"}, {"sentiment": "#;
        let r = marshal(raw, DataModel::Ssa.schema(), TEXT, &config, false, no_reprompt).unwrap();
        assert_eq!(r.opinions.len(), 1);

        assert!(marshal("[{", DataModel::Ssa.schema(), TEXT, &config, false, no_reprompt).is_err());
    }
}
