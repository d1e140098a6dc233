//! One example per line, with a fixed field order.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::generator::{Example, Metadata};
use crate::solver::Proof;
use crate::theory::{DefeasibleTheory, Label, Literal, Preference, Question, Rule, RuleId, RuleLogic};

#[derive(Serialize, Deserialize)]
struct RuleRow {
    id: RuleId,
    text: String,
    logic: RuleLogic,
}

#[derive(Serialize, Deserialize)]
struct TheoryRow {
    facts: Vec<Literal>,
    rules: Vec<RuleRow>,
    preferences: Vec<Preference>,
}

#[derive(Serialize, Deserialize)]
struct Row {
    id: String,
    text: String,
    question: Question,
    label: Label,
    proof_text: String,
    theory: TheoryRow,
    proof: Option<Proof>,
    metadata: Metadata,
}

pub fn to_line(e: &Example) -> String {
    let row = Row {
        id: e.id.clone(),
        text: e.text.clone(),
        question: e.question.clone(),
        label: e.label,
        proof_text: e.proof_text.clone(),
        theory: TheoryRow {
            facts: e.theory.facts.clone(),
            rules: e
                .theory
                .rules
                .iter()
                .zip(&e.rule_texts)
                .map(|(r, text)| RuleRow {
                    id: r.id,
                    text: text.clone(),
                    logic: r.logic(),
                })
                .collect(),
            preferences: e.theory.preferences.clone(),
        },
        proof: e.proof.clone(),
        metadata: e.metadata.clone(),
    };
    serde_json::to_string(&row).expect("examples serialize")
}

pub fn from_line(line: &str) -> Result<Example, serde_json::Error> {
    let row: Row = serde_json::from_str(line)?;
    let (rules, rule_texts) = row
        .theory
        .rules
        .into_iter()
        .map(|r| (Rule::new(r.id, r.logic.template, r.logic.body, r.logic.head), r.text))
        .unzip();
    Ok(Example {
        id: row.id,
        text: row.text,
        question: row.question,
        label: row.label,
        proof_text: row.proof_text,
        theory: DefeasibleTheory {
            facts: row.theory.facts,
            rules,
            preferences: row.theory.preferences,
        },
        rule_texts,
        proof: row.proof,
        metadata: row.metadata,
    })
}

pub fn emit_jsonl(examples: &[Example], path: &Path) -> Result<(), PipelineError> {
    let io = |source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    for e in examples {
        w.write_all(to_line(e).as_bytes()).map_err(io)?;
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_jsonl(path: &Path) -> Result<Vec<Example>, PipelineError> {
    let io = |source| PipelineError::Io {
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
        out.push(from_line(&line).map_err(|e| PipelineError::Parse {
            path: path.display().to_string(),
            line: n + 1,
            reason: e.to_string(),
        })?);
    }
    Ok(out)
}
