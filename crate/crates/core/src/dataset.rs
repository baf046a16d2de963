//! Annotated instances and their line-delimited file format.
//!
//! One JSON object per line:
//! `{"id": "...", "date": "2008-06-11" | null, "data_model": "ssa", "text": "...", "opinions": [...]}`
//! with opinions in the canonical serialized form of their data model.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::schema::{parse_opinions, DataModel, OpinionRecord, SchemaError};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedInstance {
    pub id: String,
    pub date: Option<NaiveDate>,
    pub data_model: DataModel,
    pub text: String,
    pub opinions: Vec<OpinionRecord>,
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    id: String,
    #[serde(default)]
    date: Option<NaiveDate>,
    data_model: DataModel,
    text: String,
    opinions: Vec<Value>,
}

impl AnnotatedInstance {
    pub fn opinion_count(&self) -> usize {
        self.opinions.len()
    }

    pub fn to_json(&self) -> String {
        let raw = RawInstance {
            id: self.id.clone(),
            date: self.date,
            data_model: self.data_model,
            text: self.text.clone(),
            opinions: self.opinions.iter().map(OpinionRecord::to_value).collect(),
        };
        serde_json::to_string(&raw).expect("serializable")
    }

    pub fn from_json(line: &str) -> Result<Self, String> {
        let raw: RawInstance = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let opinions = parse_opinions(&raw.opinions, raw.data_model)
            .map_err(|e: SchemaError| e.to_string())?;
        Ok(AnnotatedInstance {
            id: raw.id,
            date: raw.date,
            data_model: raw.data_model,
            text: raw.text,
            opinions,
        })
    }
}

pub fn read_instances(path: &Path) -> Result<Vec<AnnotatedInstance>, DatasetError> {
    let p = path.display().to_string();
    let file = File::open(path).map_err(|source| DatasetError::Io {
        path: p.clone(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| DatasetError::Io {
            path: p.clone(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let inst = AnnotatedInstance::from_json(&line).map_err(|message| DatasetError::Format {
            path: p.clone(),
            line: i + 1,
            message,
        })?;
        out.push(inst);
    }
    Ok(out)
}

pub fn write_instances(path: &Path, instances: &[AnnotatedInstance]) -> Result<(), DatasetError> {
    let io = |source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    for inst in instances {
        writeln!(w, "{}", inst.to_json()).map_err(io)?;
    }
    w.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_round_trip() {
        let line = r#"{"id":"POLITIFACT_00000","date":"2008-06-11","data_model":"acos","text":"John McCain opposed bankruptcy protections","opinions":[{"sentiment":"negative","aspect_term":"bankruptcy protections","aspect_category":{"entity":"bankruptcy law","entity_attribute":"general"},"opinion_span":null}]}"#;
        let inst = AnnotatedInstance::from_json(line).unwrap();
        assert_eq!(inst.opinion_count(), 1);
        assert_eq!(inst.to_json(), line);
    }

    #[test]
    fn bad_opinion_is_rejected() {
        let line = r#"{"id":"x","data_model":"ssa","text":"t","opinions":[{"sentiment":{"polarity":"meh"},"target":"t"}]}"#;
        assert!(AnnotatedInstance::from_json(line).unwrap_err().contains("meh"));
    }
}
