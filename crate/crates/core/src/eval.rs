//! Scoring predictions against a gold split.
//!
//! Rule usage is read from proof text by pattern: a rule counts as applied
//! when it follows "according to", "using" or "by applying", and a conflict
//! resolution is a "RuleA overrides RuleB" clause, read as (winner, loser).
//! Other mentions of rules, such as restating them, are ignored.

use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;
use std::path::Path;
use std::sync::LazyLock;

use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generator::Example;
use crate::rng::DetRng;
use crate::theory::{Label, RuleId};

static APPLIED: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?:according to|using|by applying) Rule(\d+)\b").expect("valid regex"));
static OVERRIDES: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"Rule(\d+) overrides Rule(\d+)\b").expect("valid regex"));

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("gold rule set is empty")]
    EmptyGold,
    #[error("prediction for unknown id {0:?}")]
    UnknownId(String),
    #[error("more than one prediction for {0:?}")]
    DuplicateId(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {reason}")]
    Parse { path: String, line: usize, reason: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Extracted {
    pub rules: BTreeSet<RuleId>,
    pub conflicts: BTreeSet<(RuleId, RuleId)>,
}

fn rule_id(s: &str) -> Option<RuleId> {
    s.parse().ok().map(RuleId)
}

pub fn extract_rules_from_text(text: &str) -> Extracted {
    let rules = APPLIED
        .captures_iter(text)
        .filter_map(|c| rule_id(&c[1]))
        .collect();
    let conflicts = OVERRIDES
        .captures_iter(text)
        .filter_map(|c| Some((rule_id(&c[1])?, rule_id(&c[2])?)))
        .collect();
    Extracted { rules, conflicts }
}

fn f1<T: Ord>(pred: &BTreeSet<T>, gold: &BTreeSet<T>) -> f64 {
    let hit = pred.intersection(gold).count() as f64;
    if hit == 0.0 {
        return 0.0;
    }
    let p = hit / pred.len() as f64;
    let r = hit / gold.len() as f64;
    2.0 * p * r / (p + r)
}

pub fn rule_f1(pred: &BTreeSet<RuleId>, gold: &BTreeSet<RuleId>) -> Result<f64, EvalError> {
    if gold.is_empty() {
        return Err(EvalError::EmptyGold);
    }
    Ok(f1(pred, gold))
}

/// `None` when the gold proof resolves no conflict.
pub fn conflict_f1(pred: &BTreeSet<(RuleId, RuleId)>, gold: &BTreeSet<(RuleId, RuleId)>) -> Option<f64> {
    (!gold.is_empty()).then(|| f1(pred, gold))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proof_text: Option<String>,
}

pub fn read_predictions(path: &Path) -> Result<Vec<Prediction>, EvalError> {
    let io = |source| EvalError::Io {
        path: path.display().to_string(),
        source,
    };
    let f = std::fs::File::open(path).map_err(io)?;
    let mut out = Vec::new();
    for (n, line) in std::io::BufReader::new(f).lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| EvalError::Parse {
            path: path.display().to_string(),
            line: n + 1,
            reason: e.to_string(),
        })?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport {
    /// Predictions matched to a gold example.
    pub evaluated: usize,
    pub accuracy: f64,
    /// Row and column order of `confusion`.
    pub labels: Vec<Label>,
    /// `confusion[gold][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    /// Mean over correctly labelled proved/disproved examples.
    pub rule_f1: Option<f64>,
    pub rule_f1_count: usize,
    pub conflict_f1: Option<f64>,
    pub conflict_f1_count: usize,
    /// In proof scope but with no conflict in the gold proof.
    pub conflict_f1_excluded: usize,
    /// Correctly labelled unknown examples, outside proof scope.
    pub unknown_excluded: usize,
    /// In proof scope, but no rule could be read from the predicted text.
    pub unparsed_proofs: usize,
    /// Gold examples without a prediction.
    pub missing: usize,
}

struct PerExample {
    gold: Label,
    pred: Label,
    rule_f1: Option<f64>,
    conflict_f1: Option<f64>,
    no_gold_conflict: bool,
    unknown: bool,
    unparsed: bool,
}

fn score_one(p: &Prediction, g: &Example) -> PerExample {
    let mut out = PerExample {
        gold: g.label,
        pred: p.label,
        rule_f1: None,
        conflict_f1: None,
        no_gold_conflict: false,
        unknown: false,
        unparsed: false,
    };
    if p.label != g.label {
        return out;
    }
    let Some(proof) = g.proof.as_ref().filter(|_| g.label != Label::Unknown) else {
        out.unknown = true;
        return out;
    };
    let gold_rules: BTreeSet<RuleId> = proof.rules().into_iter().collect();
    let gold_conflicts: BTreeSet<(RuleId, RuleId)> = proof.conflicts.iter().map(|c| (c.winner, c.loser)).collect();
    let pred = extract_rules_from_text(p.proof_text.as_deref().unwrap_or(""));
    out.unparsed = pred.rules.is_empty();
    out.rule_f1 = rule_f1(&pred.rules, &gold_rules).ok();
    out.conflict_f1 = conflict_f1(&pred.conflicts, &gold_conflicts);
    out.no_gold_conflict = gold_conflicts.is_empty();
    out
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

pub fn score(predictions: &[Prediction], gold: &[Example]) -> Result<ScoreReport, EvalError> {
    let index: HashMap<&str, usize> = gold.iter().enumerate().map(|(i, e)| (e.id.as_str(), i)).collect();
    let mut matched: Vec<Option<&Prediction>> = vec![None; gold.len()];
    for p in predictions {
        let &i = index.get(p.id.as_str()).ok_or_else(|| EvalError::UnknownId(p.id.clone()))?;
        if matched[i].replace(p).is_some() {
            return Err(EvalError::DuplicateId(p.id.clone()));
        }
    }
    // gold order keeps the floating point sums independent of prediction order
    let per: Vec<PerExample> = matched
        .par_iter()
        .zip(gold.par_iter())
        .filter_map(|(p, g)| p.map(|p| score_one(p, g)))
        .collect();

    let binary = gold
        .iter()
        .map(|e| e.label)
        .chain(predictions.iter().map(|p| p.label))
        .all(|l| l != Label::Unknown);
    let labels: Vec<Label> = if binary {
        vec![Label::Proved, Label::Disproved]
    } else {
        Label::ALL.to_vec()
    };
    let pos = |l: Label| labels.iter().position(|x| *x == l).expect("label in matrix");
    let mut confusion = vec![vec![0; labels.len()]; labels.len()];
    for e in &per {
        confusion[pos(e.gold)][pos(e.pred)] += 1;
    }
    let correct = per.iter().filter(|e| e.gold == e.pred).count();
    let rules: Vec<f64> = per.iter().filter_map(|e| e.rule_f1).collect();
    let conflicts: Vec<f64> = per.iter().filter_map(|e| e.conflict_f1).collect();
    Ok(ScoreReport {
        evaluated: per.len(),
        accuracy: if per.is_empty() {
            0.0
        } else {
            correct as f64 / per.len() as f64
        },
        labels,
        confusion,
        rule_f1: mean(&rules),
        rule_f1_count: rules.len(),
        conflict_f1: mean(&conflicts),
        conflict_f1_count: conflicts.len(),
        conflict_f1_excluded: per.iter().filter(|e| e.rule_f1.is_some() && e.no_gold_conflict).count(),
        unknown_excluded: per.iter().filter(|e| e.unknown).count(),
        unparsed_proofs: per.iter().filter(|e| e.rule_f1.is_some() && e.unparsed).count(),
        missing: matched.iter().filter(|m| m.is_none()).count(),
    })
}

/// Predictions that copy the gold labels and proof texts.
pub fn gold_predictions(gold: &[Example]) -> Vec<Prediction> {
    gold.iter()
        .map(|e| Prediction {
            id: e.id.clone(),
            label: e.label,
            proof_text: Some(e.proof_text.clone()),
        })
        .collect()
}

/// `n` decided examples chosen reproducibly for manual proof review.
pub fn sample_for_annotation(gold: &[Example], n: usize, seed: u64) -> Vec<&Example> {
    let mut decided: Vec<&Example> = gold.iter().filter(|e| e.label != Label::Unknown).collect();
    let mut rng = DetRng::new(seed);
    rng.shuffle(&mut decided);
    decided.truncate(n);
    decided
}
