//! Component-level exact-match metric.
//!
//! Each (predicted, gold) pair scores the fraction of leaf components whose
//! normalized values agree. Predictions are aligned one-to-one with gold
//! opinions by maximum total overlap, and corpus precision/recall divide the
//! summed overlap by the predicted and gold counts respectively.

use serde::{Deserialize, Serialize};

use crate::assignment::max_weight_assignment;
use crate::schema::{leaf_values, DataModelSchema, OpinionRecord, SchemaError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparePolicy {
    /// Whether two absent values count as agreement.
    pub null_matches_null: bool,
}

impl Default for ComparePolicy {
    fn default() -> Self {
        ComparePolicy {
            null_matches_null: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalInstance {
    pub instance_id: String,
    pub gold: Vec<OpinionRecord>,
    pub predicted: Vec<OpinionRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignedPair {
    pub gold: usize,
    pub predicted: usize,
    pub overlap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub pairs: Vec<AlignedPair>,
    pub total_overlap: f64,
    /// Number of agreeing leaf components over all pairs; `total_overlap`
    /// is this divided by the schema's leaf count.
    pub matched_components: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub tp: f64,
    pub n_pred: usize,
    pub n_gold: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn matching_components(
    a: &[Option<String>],
    b: &[Option<String>],
    policy: &ComparePolicy,
) -> usize {
    a.iter()
        .zip(b)
        .filter(|(x, y)| match (x, y) {
            (Some(x), Some(y)) => x == y,
            (None, None) => policy.null_matches_null,
            _ => false,
        })
        .count()
}

/// Number of leaf positions on which `pred` and `gold` agree.
pub fn matching_leaf_count(
    pred: &OpinionRecord,
    gold: &OpinionRecord,
    schema: &DataModelSchema,
    policy: &ComparePolicy,
) -> Result<usize, SchemaError> {
    Ok(matching_components(
        &leaf_values(pred, schema)?,
        &leaf_values(gold, schema)?,
        policy,
    ))
}

/// Fraction of leaf components on which `pred` and `gold` agree.
pub fn overlap(
    pred: &OpinionRecord,
    gold: &OpinionRecord,
    schema: &DataModelSchema,
    policy: &ComparePolicy,
) -> Result<f64, SchemaError> {
    let m = matching_leaf_count(pred, gold, schema, policy)?;
    Ok(m as f64 / schema.leaf_count() as f64)
}

/// Optimal one-to-one alignment of predicted to gold opinions. Pairs with
/// zero overlap are omitted.
pub fn align(
    instance: &EvalInstance,
    schema: &DataModelSchema,
    policy: &ComparePolicy,
) -> Result<Alignment, SchemaError> {
    let gold: Vec<_> = instance
        .gold
        .iter()
        .map(|g| leaf_values(g, schema))
        .collect::<Result<_, _>>()?;
    let pred: Vec<_> = instance
        .predicted
        .iter()
        .map(|p| leaf_values(p, schema))
        .collect::<Result<_, _>>()?;
    let weights: Vec<Vec<i64>> = gold
        .iter()
        .map(|g| {
            pred.iter()
                .map(|p| matching_components(p, g, policy) as i64)
                .collect()
        })
        .collect();
    let leaf_count = schema.leaf_count() as f64;
    let mut pairs = Vec::new();
    let mut matched = 0usize;
    for (gi, pj) in max_weight_assignment(&weights).into_iter().enumerate() {
        let Some(pj) = pj else { continue };
        let w = weights[gi][pj] as usize;
        if w == 0 {
            continue;
        }
        matched += w;
        pairs.push(AlignedPair {
            gold: gi,
            predicted: pj,
            overlap: w as f64 / leaf_count,
        });
    }
    Ok(Alignment {
        pairs,
        total_overlap: matched as f64 / leaf_count,
        matched_components: matched,
    })
}

impl MetricReport {
    /// Builds a report from counts, applying the zero-denominator conventions:
    /// an empty corpus on both sides scores 1, an empty side otherwise 0.
    pub fn from_counts(tp: f64, n_pred: usize, n_gold: usize) -> Self {
        if n_pred == 0 && n_gold == 0 {
            return MetricReport {
                tp,
                n_pred,
                n_gold,
                precision: 1.0,
                recall: 1.0,
                f1: 1.0,
            };
        }
        let precision = if n_pred == 0 { 0.0 } else { tp / n_pred as f64 };
        let recall = if n_gold == 0 { 0.0 } else { tp / n_gold as f64 };
        MetricReport {
            tp,
            n_pred,
            n_gold,
            precision,
            recall,
            f1: f1_score(precision, recall),
        }
    }

    pub fn precision_pct(&self) -> String {
        pct(self.precision)
    }

    pub fn recall_pct(&self) -> String {
        pct(self.recall)
    }

    pub fn f1_pct(&self) -> String {
        pct(self.f1)
    }
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Percentage with two decimals, e.g. `0.53333` -> `"53.33"`.
pub fn pct(x: f64) -> String {
    format!("{:.2}", x * 100.0)
}

/// Corpus precision, recall and F1 over all instances.
pub fn corpus_metric(
    instances: &[EvalInstance],
    schema: &DataModelSchema,
    policy: &ComparePolicy,
) -> Result<MetricReport, SchemaError> {
    let mut matched = 0usize;
    let (mut n_pred, mut n_gold) = (0usize, 0usize);
    for inst in instances {
        matched += align(inst, schema, policy)?.matched_components;
        n_pred += inst.predicted.len();
        n_gold += inst.gold.len();
    }
    let tp = matched as f64 / schema.leaf_count() as f64;
    Ok(MetricReport::from_counts(tp, n_pred, n_gold))
}
