//! Inter-annotator agreement per opinion concept, measured as F1 between the
//! concept values two annotators produced for the same documents.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::kb::KbEntry;
use crate::metric::MetricReport;
use crate::schema::{normalize, DataModel, DataModelSchema, OpinionRecord};

/// Opinion concepts compared across annotators, in report row order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConceptName {
    Target,
    HolderEntity,
    Reason,
    Qualifier,
    SentimentIntensity,
    HolderSpan,
    AspectTerm,
    Entity,
    Category,
    SentimentPolarity,
    SentimentExpression,
}

impl ConceptName {
    pub const ALL: [ConceptName; 11] = [
        ConceptName::Target,
        ConceptName::HolderEntity,
        ConceptName::Reason,
        ConceptName::Qualifier,
        ConceptName::SentimentIntensity,
        ConceptName::HolderSpan,
        ConceptName::AspectTerm,
        ConceptName::Entity,
        ConceptName::Category,
        ConceptName::SentimentPolarity,
        ConceptName::SentimentExpression,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ConceptName::Target => "Target",
            ConceptName::HolderEntity => "Holder Entity",
            ConceptName::Reason => "Reason",
            ConceptName::Qualifier => "Qualifier",
            ConceptName::SentimentIntensity => "Sentiment Intensity",
            ConceptName::HolderSpan => "Holder Span",
            ConceptName::AspectTerm => "Aspect Term",
            ConceptName::Entity => "Entity",
            ConceptName::Category => "Category",
            ConceptName::SentimentPolarity => "Sentiment Polarity",
            ConceptName::SentimentExpression => "Sentiment Expression",
        }
    }
}

impl fmt::Display for ConceptName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Non-null normalized values of `concept` across `opinions`, or `None` when
/// the concept does not apply to the schema.
pub fn concept_values(
    opinions: &[OpinionRecord],
    schema: &DataModelSchema,
    concept: ConceptName,
) -> Option<Vec<String>> {
    let component = schema.component_for(concept)?;
    let values = opinions
        .iter()
        .filter(|op| op.data_model() == schema.model_id)
        .filter_map(|op| match (op, concept) {
            (OpinionRecord::Acos(q), ConceptName::Category) => Some(format!(
                "{}#{}",
                normalize(&q.category_entity),
                normalize(&q.category_attribute)
            )),
            _ => {
                let leaves = crate::schema::leaf_values(op, schema).ok()?;
                leaves[schema.position(component)?].clone()
            }
        })
        .collect();
    Some(values)
}

/// Counts behind one agreement cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConceptScore {
    pub matched: usize,
    pub n_a: usize,
    pub n_b: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Document id -> opinions, for one annotator under one data model.
pub type DocAnnotations = BTreeMap<String, Vec<OpinionRecord>>;

fn multiset_matches(a: &[String], b: &[String]) -> usize {
    let mut pool: BTreeMap<&str, usize> = BTreeMap::new();
    for v in b {
        *pool.entry(v.as_str()).or_insert(0) += 1;
    }
    a.iter()
        .filter(|v| match pool.get_mut(v.as_str()) {
            Some(n) if *n > 0 => {
                *n -= 1;
                true
            }
            _ => false,
        })
        .count()
}

/// F1 of annotator B's concept values against annotator A's. Documents
/// present on one side only count as annotated-empty on the other.
pub fn concept_f1(
    a: &DocAnnotations,
    b: &DocAnnotations,
    schema: &DataModelSchema,
    concept: ConceptName,
) -> Option<ConceptScore> {
    if !schema.has_concept(concept) {
        return None;
    }
    let ids: BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    let (mut matched, mut n_a, mut n_b) = (0, 0, 0);
    for id in ids {
        let va = a
            .get(id)
            .and_then(|ops| concept_values(ops, schema, concept))
            .unwrap_or_default();
        let vb = b
            .get(id)
            .and_then(|ops| concept_values(ops, schema, concept))
            .unwrap_or_default();
        matched += multiset_matches(&va, &vb);
        n_a += va.len();
        n_b += vb.len();
    }
    let r = MetricReport::from_counts(matched as f64, n_b, n_a);
    Some(ConceptScore {
        matched,
        n_a,
        n_b,
        precision: r.precision,
        recall: r.recall,
        f1: r.f1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementCell {
    pub data_model: DataModel,
    pub concept: ConceptName,
    /// F1 x 100 rounded to two decimals; `None` marks a not-applicable cell.
    pub f1_pct: Option<f64>,
    pub score: Option<ConceptScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub data_model: DataModel,
    pub docs_a: usize,
    pub docs_b: usize,
    pub docs_shared: usize,
    pub docs_compared: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub dataset: String,
    pub annotator_a: BTreeMap<DataModel, String>,
    pub annotator_b: BTreeMap<DataModel, String>,
    pub cells: Vec<AgreementCell>,
    pub coverage: Vec<Coverage>,
    pub warnings: Vec<String>,
}

fn round2(x: f64) -> f64 {
    (x * 100.0 * 100.0).round() / 100.0
}

/// Groups entries per data model, keeping one annotator per model.
fn by_model(entries: &[KbEntry], side: &str, warnings: &mut Vec<String>) -> BTreeMap<DataModel, (String, DocAnnotations)> {
    let mut out: BTreeMap<DataModel, (String, DocAnnotations)> = BTreeMap::new();
    let mut ignored = BTreeSet::new();
    for e in entries {
        let who = e.annotator.to_string();
        let slot = out
            .entry(e.data_model)
            .or_insert_with(|| (who.clone(), DocAnnotations::new()));
        if slot.0 != who {
            ignored.insert((e.data_model, who));
            continue;
        }
        slot.1.entry(e.doc_id.clone()).or_default().extend(e.opinions.iter().cloned());
    }
    for (model, who) in ignored {
        warnings.push(format!("{side}: ignoring extra {model} annotator {who}"));
    }
    out
}

/// Agreement between two knowledge bases, one column per data model.
pub fn agreement_table(dataset: &str, kb_a: &[KbEntry], kb_b: &[KbEntry]) -> AgreementReport {
    let mut warnings = Vec::new();
    let a = by_model(kb_a, "A", &mut warnings);
    let b = by_model(kb_b, "B", &mut warnings);
    let empty = DocAnnotations::new();
    let mut cells = Vec::new();
    let mut coverage = Vec::new();
    for model in DataModel::ALL.iter().copied() {
        let schema = model.schema();
        let present = a.contains_key(&model) || b.contains_key(&model);
        let docs_a = a.get(&model).map_or(&empty, |x| &x.1);
        let docs_b = b.get(&model).map_or(&empty, |x| &x.1);
        if present {
            let shared = docs_a.keys().filter(|k| docs_b.contains_key(*k)).count();
            let union = docs_a.len() + docs_b.len() - shared;
            if shared == 0 {
                warnings.push(format!(
                    "{model}: the two knowledge bases share no document ids; unmatched documents count as empty"
                ));
            }
            coverage.push(Coverage {
                data_model: model,
                docs_a: docs_a.len(),
                docs_b: docs_b.len(),
                docs_shared: shared,
                docs_compared: union,
            });
        }
        for concept in ConceptName::ALL {
            let score = if present {
                concept_f1(docs_a, docs_b, schema, concept)
            } else {
                None
            };
            cells.push(AgreementCell {
                data_model: model,
                concept,
                f1_pct: score.map(|s| round2(s.f1)),
                score,
            });
        }
    }
    AgreementReport {
        dataset: dataset.to_string(),
        annotator_a: a.iter().map(|(m, (who, _))| (*m, who.clone())).collect(),
        annotator_b: b.iter().map(|(m, (who, _))| (*m, who.clone())).collect(),
        cells,
        coverage,
        warnings,
    }
}

impl AgreementReport {
    pub fn cell(&self, model: DataModel, concept: ConceptName) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| c.data_model == model && c.concept == concept)
            .and_then(|c| c.f1_pct)
    }
}

/// Text table with one row per concept and a column group per report,
/// `--` marking cells that do not apply.
pub fn render_table(reports: &[AgreementReport]) -> String {
    let label_w = ConceptName::ALL.iter().map(|c| c.label().len()).max().unwrap_or(0);
    let col_w = 7;
    let group_w = DataModel::ALL.len() * (col_w + 1) - 1;
    let mut out = String::new();
    let _ = write!(out, "{:<label_w$}", "Datasets");
    for r in reports {
        let _ = write!(out, " | {:^group_w$}", r.dataset);
    }
    out.push('\n');
    let _ = write!(out, "{:<label_w$}", "Data Models");
    for _ in reports {
        out.push_str(" |");
        for m in DataModel::ALL {
            let _ = write!(out, " {:>col_w$}", m.label());
        }
    }
    out.push('\n');
    out.push_str(&"-".repeat(label_w + reports.len() * (group_w + 3)));
    out.push('\n');
    for concept in ConceptName::ALL {
        let _ = write!(out, "{:<label_w$}", concept.label());
        for r in reports {
            out.push_str(" |");
            for m in DataModel::ALL {
                match r.cell(*m, concept) {
                    Some(v) => {
                        let _ = write!(out, " {v:>col_w$.2}");
                    }
                    None => {
                        let _ = write!(out, " {:>col_w$}", "--");
                    }
                }
            }
        }
        out.push('\n');
    }
    out.lines().map(|l| format!("{}\n", l.trim_end())).collect()
}
