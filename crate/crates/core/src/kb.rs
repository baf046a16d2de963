//! Append-only temporal knowledge base.
//!
//! Storage is one JSON object per line (UTF-8). Keys, in order:
//! `doc_id`, `date` (YYYY-MM-DD), `text`, `data_model`, `annotator`
//! (`model_name`, `shots`, `cot`), `opinions` (canonical form), `warnings`,
//! `schema_version`, `created_at` (RFC 3339).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::marshal::MarshalWarning;
use crate::schema::{normalize, parse_opinions, DataModel, OpinionRecord};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Error)]
pub enum KbError {
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
    #[error("entry for document {doc_id} ({data_model}, {annotator}) already exists")]
    Duplicate {
        doc_id: String,
        data_model: DataModel,
        annotator: Annotator,
    },
    #[error("invalid entry: {0}")]
    Invalid(String),
    #[error("invalid date range: {from} is after {to}")]
    InvalidRange { from: NaiveDate, to: NaiveDate },
    #[error("no entries match the selection")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Annotator {
    pub model_name: String,
    pub shots: usize,
    pub cot: bool,
}

impl fmt::Display for Annotator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({}-shot, {})",
            self.model_name,
            self.shots,
            if self.cot { "cot" } else { "no cot" }
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KbEntry {
    pub doc_id: String,
    pub date: NaiveDate,
    pub text: String,
    pub data_model: DataModel,
    pub annotator: Annotator,
    pub opinions: Vec<OpinionRecord>,
    pub warnings: Vec<MarshalWarning>,
    pub schema_version: String,
    pub created_at: DateTime<Utc>,
}

#[derive(Serialize, Deserialize)]
struct RawEntry {
    doc_id: String,
    date: NaiveDate,
    text: String,
    data_model: DataModel,
    annotator: Annotator,
    opinions: Vec<Value>,
    #[serde(default)]
    warnings: Vec<MarshalWarning>,
    schema_version: String,
    created_at: DateTime<Utc>,
}

pub type EntryKey = (String, DataModel, Annotator);

impl KbEntry {
    pub fn key(&self) -> EntryKey {
        (self.doc_id.clone(), self.data_model, self.annotator.clone())
    }

    pub fn validate(&self) -> Result<(), KbError> {
        if self.doc_id.is_empty() {
            return Err(KbError::Invalid("empty doc_id".into()));
        }
        for op in &self.opinions {
            if op.data_model() != self.data_model {
                return Err(KbError::Invalid(format!(
                    "document {}: {} opinion in a {} entry",
                    self.doc_id,
                    op.data_model(),
                    self.data_model
                )));
            }
            op.validate()
                .map_err(|e| KbError::Invalid(format!("document {}: {e}", self.doc_id)))?;
        }
        Ok(())
    }

    pub fn to_line(&self) -> String {
        let raw = RawEntry {
            doc_id: self.doc_id.clone(),
            date: self.date,
            text: self.text.clone(),
            data_model: self.data_model,
            annotator: self.annotator.clone(),
            opinions: self.opinions.iter().map(OpinionRecord::to_value).collect(),
            warnings: self.warnings.clone(),
            schema_version: self.schema_version.clone(),
            created_at: self.created_at,
        };
        serde_json::to_string(&raw).expect("serializable")
    }

    pub fn from_line(line: &str) -> Result<Self, String> {
        let raw: RawEntry = serde_json::from_str(line).map_err(|e| e.to_string())?;
        let opinions = parse_opinions(&raw.opinions, raw.data_model).map_err(|e| e.to_string())?;
        Ok(KbEntry {
            doc_id: raw.doc_id,
            date: raw.date,
            text: raw.text,
            data_model: raw.data_model,
            annotator: raw.annotator,
            opinions,
            warnings: raw.warnings,
            schema_version: raw.schema_version,
            created_at: raw.created_at,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KbFilter {
    pub data_model: Option<DataModel>,
    pub annotator: Option<Annotator>,
}

impl KbFilter {
    pub fn matches(&self, e: &KbEntry) -> bool {
        self.data_model.is_none_or(|m| m == e.data_model)
            && self.annotator.as_ref().is_none_or(|a| *a == e.annotator)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnDuplicate {
    Reject,
    Overwrite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ack {
    /// 1-based line of the entry in the store file.
    pub line: usize,
    pub replaced: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KbStats {
    pub date_from: NaiveDate,
    pub date_to: NaiveDate,
    pub total: usize,
    pub unique_texts: usize,
    pub daily_median: f64,
}

pub struct KbStore {
    path: PathBuf,
    entries: Vec<KbEntry>,
    index: HashMap<EntryKey, usize>,
    file: File,
}

impl KbStore {
    /// Opens (or creates) a store file and loads its entries.
    pub fn open(path: &Path) -> Result<Self, KbError> {
        let io = |source| KbError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut entries = Vec::new();
        let mut index = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(path).map_err(io)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line.map_err(io)?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry = KbEntry::from_line(&line).map_err(|message| KbError::Format {
                    path: path.display().to_string(),
                    line: i + 1,
                    message,
                })?;
                if index.insert(entry.key(), entries.len()).is_some() {
                    return Err(KbError::Format {
                        path: path.display().to_string(),
                        line: i + 1,
                        message: format!("duplicate entry for document {}", entry.doc_id),
                    });
                }
                entries.push(entry);
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
        Ok(KbStore {
            path: path.to_path_buf(),
            entries,
            index,
            file,
        })
    }

    /// Reads every entry of a store file without opening it for writing.
    pub fn read_all(path: &Path) -> Result<Vec<KbEntry>, KbError> {
        let io = |source| KbError::Io {
            path: path.display().to_string(),
            source,
        };
        let reader = BufReader::new(File::open(path).map_err(io)?);
        let mut out = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(io)?;
            if line.trim().is_empty() {
                continue;
            }
            out.push(KbEntry::from_line(&line).map_err(|message| KbError::Format {
                path: path.display().to_string(),
                line: i + 1,
                message,
            })?);
        }
        Ok(out)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn entries(&self) -> &[KbEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, key: &EntryKey) -> bool {
        self.index.contains_key(key)
    }

    pub fn append(&mut self, entry: KbEntry, on_duplicate: OnDuplicate) -> Result<Ack, KbError> {
        entry.validate()?;
        let key = entry.key();
        if let Some(&pos) = self.index.get(&key) {
            return match on_duplicate {
                OnDuplicate::Reject => Err(KbError::Duplicate {
                    doc_id: key.0,
                    data_model: key.1,
                    annotator: key.2,
                }),
                OnDuplicate::Overwrite => {
                    self.entries[pos] = entry;
                    self.rewrite()?;
                    Ok(Ack {
                        line: pos + 1,
                        replaced: true,
                    })
                }
            };
        }
        let mut line = entry.to_line();
        line.push('\n');
        self.file.write_all(line.as_bytes()).map_err(|source| KbError::Io {
            path: self.path.display().to_string(),
            source,
        })?;
        self.index.insert(key, self.entries.len());
        self.entries.push(entry);
        Ok(Ack {
            line: self.entries.len(),
            replaced: false,
        })
    }

    fn rewrite(&mut self) -> Result<(), KbError> {
        let io = |source| KbError::Io {
            path: self.path.display().to_string(),
            source,
        };
        let tmp = self.path.with_extension("rewrite.tmp");
        let mut body = String::new();
        for e in &self.entries {
            body.push_str(&e.to_line());
            body.push('\n');
        }
        fs::write(&tmp, body).map_err(io)?;
        fs::rename(&tmp, &self.path).map_err(io)?;
        self.file = OpenOptions::new().append(true).open(&self.path).map_err(io)?;
        Ok(())
    }

    /// Flushes appended entries to stable storage.
    pub fn sync(&self) -> Result<(), KbError> {
        self.file.sync_all().map_err(|source| KbError::Io {
            path: self.path.display().to_string(),
            source,
        })
    }

    pub fn query_range(
        &self,
        from: NaiveDate,
        to: NaiveDate,
        filter: &KbFilter,
    ) -> Result<Vec<&KbEntry>, KbError> {
        query_range(&self.entries, from, to, filter)
    }

    pub fn stats(&self, filter: &KbFilter) -> Result<KbStats, KbError> {
        stats(&self.entries, filter)
    }
}

/// Entries dated within `[from, to]` that match `filter`, ordered by
/// (date, doc_id).
pub fn query_range<'a>(
    entries: &'a [KbEntry],
    from: NaiveDate,
    to: NaiveDate,
    filter: &KbFilter,
) -> Result<Vec<&'a KbEntry>, KbError> {
    if from > to {
        return Err(KbError::InvalidRange { from, to });
    }
    let mut out: Vec<&KbEntry> = entries
        .iter()
        .filter(|e| e.date >= from && e.date <= to && filter.matches(e))
        .collect();
    out.sort_by(|a, b| a.date.cmp(&b.date).then_with(|| a.doc_id.cmp(&b.doc_id)));
    Ok(out)
}

pub fn median(values: &mut [usize]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable();
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2] as f64
    } else {
        (values[n / 2 - 1] + values[n / 2]) as f64 / 2.0
    })
}

/// Corpus statistics over (doc_id, date, text) triples. Documents are
/// counted once per id; the first date seen for an id is used.
pub fn document_stats<'a>(
    docs: impl IntoIterator<Item = (&'a str, NaiveDate, &'a str)>,
) -> Result<KbStats, KbError> {
    let mut seen: BTreeMap<&str, NaiveDate> = BTreeMap::new();
    let mut texts = BTreeSet::new();
    for (id, date, text) in docs {
        if let std::collections::btree_map::Entry::Vacant(v) = seen.entry(id) {
            v.insert(date);
            texts.insert(normalize(text));
        }
    }
    if seen.is_empty() {
        return Err(KbError::Empty);
    }
    let mut per_day: BTreeMap<NaiveDate, usize> = BTreeMap::new();
    for date in seen.values() {
        *per_day.entry(*date).or_insert(0) += 1;
    }
    let mut counts: Vec<usize> = per_day.values().copied().collect();
    Ok(KbStats {
        date_from: *per_day.keys().next().expect("non-empty"),
        date_to: *per_day.keys().next_back().expect("non-empty"),
        total: seen.len(),
        unique_texts: texts.len(),
        daily_median: median(&mut counts).expect("non-empty"),
    })
}

pub fn stats(entries: &[KbEntry], filter: &KbFilter) -> Result<KbStats, KbError> {
    document_stats(
        entries
            .iter()
            .filter(|e| filter.matches(e))
            .map(|e| (e.doc_id.as_str(), e.date, e.text.as_str())),
    )
}

impl fmt::Display for KbStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<12} {:<12} {:>8} {:>8} {:>12}", "From", "To", "Total", "Unique", "Daily Median")?;
        writeln!(
            f,
            "{:<12} {:<12} {:>8} {:>8} {:>12}",
            self.date_from.to_string(),
            self.date_to.to_string(),
            self.total,
            self.unique_texts,
            self.daily_median
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [6, 2, 4]), Some(4.0));
        assert_eq!(median(&mut [1, 2, 3, 10]), Some(2.5));
        assert_eq!(median(&mut []), None);
    }

    #[test]
    fn document_stats_by_hand() {
        let d = |s: &str| NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap();
        let docs = [
            ("a", d("2020-01-02"), "Buy now"),
            ("b", d("2020-01-02"), "buy  NOW"),
            ("c", d("2020-01-01"), "sell"),
            ("a", d("2020-01-05"), "Buy now"),
        ];
        let s = document_stats(docs).unwrap();
        assert_eq!(s.total, 3);
        assert_eq!(s.unique_texts, 2);
        assert_eq!((s.date_from, s.date_to), (d("2020-01-01"), d("2020-01-02")));
        assert_eq!(s.daily_median, 1.5);
        assert!(matches!(document_stats([]), Err(KbError::Empty)));
    }
}
