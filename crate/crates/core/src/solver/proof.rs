use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::entail::Evaluation;
use super::{foreign_satisfied, KnowledgeOracle, SolverError};
use crate::theory::{DefeasibleTheory, Entity, Label, Literal, Question, RuleId, TemplateKind, Term};

/// One rule application: `rule` instantiated fires on `premises`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofStep {
    pub rule: RuleId,
    pub premises: Vec<Literal>,
    pub conclusion: Literal,
    /// Entity satisfying the body of an existential rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Entity>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConflictKind {
    /// Both rules fire; the winner is preferred.
    Type1,
    /// The preferred rule cannot fire, so the weaker one stands.
    Type2,
}

/// `winner` overrides `loser`. For Type2 the preference runs the other way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConflictResolution {
    pub winner: RuleId,
    pub loser: RuleId,
    pub kind: ConflictKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proof {
    pub steps: Vec<ProofStep>,
    pub conflicts: Vec<ConflictResolution>,
}

impl Proof {
    pub fn rules(&self) -> Vec<RuleId> {
        let mut out: Vec<RuleId> = self.steps.iter().map(|s| s.rule).collect();
        out.sort();
        out.dedup();
        out
    }

    /// Longest chain of rule applications ending in the goal (the last step).
    pub fn depth(&self) -> usize {
        let by_conclusion: std::collections::HashMap<&Literal, usize> = self
            .steps
            .iter()
            .enumerate()
            .map(|(i, s)| (&s.conclusion, i))
            .collect();
        let mut memo = vec![None; self.steps.len()];
        fn go(
            i: usize,
            steps: &[ProofStep],
            idx: &std::collections::HashMap<&Literal, usize>,
            memo: &mut [Option<usize>],
        ) -> usize {
            if let Some(d) = memo[i] {
                return d;
            }
            memo[i] = Some(1);
            let below = steps[i]
                .premises
                .iter()
                .filter_map(|p| idx.get(p).copied())
                .filter(|&j| j != i)
                .map(|j| go(j, steps, idx, memo))
                .max()
                .unwrap_or(0);
            memo[i] = Some(below + 1);
            below + 1
        }
        match self.steps.len() {
            0 => 0,
            n => go(n - 1, &self.steps, &by_conclusion, &mut memo),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProofError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("step {step}: {rule} does not exist")]
    UnknownRule { step: usize, rule: RuleId },
    #[error("step {step}: premises or conclusion do not instantiate {rule}")]
    BadInstance { step: usize, rule: RuleId },
    #[error("step {step}: premise {premise} is not established at that point")]
    UnsupportedPremise { step: usize, premise: String },
    #[error("conflict {winner} over {loser} is not backed by the preferences")]
    BadPreference { winner: RuleId, loser: RuleId },
    #[error("conflict {winner} over {loser} does not involve a concluded literal")]
    NotAConflict { winner: RuleId, loser: RuleId },
    #[error("{loser} is claimed inapplicable but its body holds")]
    LoserApplicable { loser: RuleId },
    #[error("proof does not end in {expected}")]
    WrongConclusion { expected: String },
    #[error("a proof of an unknown label must be empty")]
    UnknownWithProof,
}

/// Replays `proof` against `t` and checks it supports `label` for `q`.
pub fn verify_proof(
    t: &DefeasibleTheory,
    q: &Question,
    label: Label,
    proof: &Proof,
    oracle: &dyn KnowledgeOracle,
) -> Result<(), ProofError> {
    let goal = match label {
        Label::Proved => q.literal().clone(),
        Label::Disproved => q.literal().negate(),
        Label::Unknown => {
            return if proof.steps.is_empty() && proof.conflicts.is_empty() {
                Ok(())
            } else {
                Err(ProofError::UnknownWithProof)
            };
        }
    };

    let mut known: HashSet<Literal> = t.facts.iter().cloned().collect();
    for (i, step) in proof.steps.iter().enumerate() {
        let rule = t.rule(step.rule).ok_or(ProofError::UnknownRule {
            step: i,
            rule: step.rule,
        })?;
        let bad = || ProofError::BadInstance {
            step: i,
            rule: step.rule,
        };
        let binding = match rule.template {
            TemplateKind::T1 | TemplateKind::T2 => step.conclusion.subject().as_entity().cloned(),
            TemplateKind::T6 => step.witness.clone(),
            _ => None,
        };
        if rule.template.quantifier() != crate::theory::Quantifier::None && binding.is_none() {
            return Err(bad());
        }
        let inst = |l: &Literal| match &binding {
            Some(e) => l.bind(e),
            None => l.clone(),
        };
        if inst(&rule.head) != step.conclusion {
            return Err(bad());
        }
        let body: Vec<Literal> = rule.body.iter().map(inst).collect();
        if body != step.premises {
            return Err(bad());
        }
        for p in &body {
            let ok = if p.is_foreign() {
                foreign_satisfied(p, &t.facts, oracle)?
            } else {
                known.contains(p)
            };
            if !ok {
                return Err(ProofError::UnsupportedPremise {
                    step: i,
                    premise: p.to_string(),
                });
            }
        }
        known.insert(step.conclusion.clone());
    }

    let ends_right = match proof.steps.last() {
        Some(last) => last.conclusion == goal,
        None => t.facts.contains(&goal),
    };
    if !ends_right {
        return Err(ProofError::WrongConclusion {
            expected: goal.to_string(),
        });
    }

    let mut eval = None;
    for c in &proof.conflicts {
        let preferred = match c.kind {
            ConflictKind::Type1 => t.prefers(c.winner, c.loser),
            ConflictKind::Type2 => t.prefers(c.loser, c.winner),
        };
        if !preferred {
            return Err(ProofError::BadPreference {
                winner: c.winner,
                loser: c.loser,
            });
        }
        let loser = t.rule(c.loser).ok_or(ProofError::NotAConflict {
            winner: c.winner,
            loser: c.loser,
        })?;
        // the conflict must be over some literal the proof concludes
        let contested: Vec<&ProofStep> = proof
            .steps
            .iter()
            .filter(|s| {
                let head = match s.conclusion.subject() {
                    Term::Entity(e) => loser.head.bind(e),
                    Term::Var => loser.head.clone(),
                };
                head == s.conclusion.negate()
            })
            .collect();
        if contested.is_empty() {
            return Err(ProofError::NotAConflict {
                winner: c.winner,
                loser: c.loser,
            });
        }
        if c.kind == ConflictKind::Type2 {
            let eval = match &mut eval {
                Some(e) => e,
                None => eval.insert(Evaluation::run(t, oracle)?),
            };
            for step in contested {
                let opposing = eval
                    .ground()
                    .rules
                    .iter()
                    .filter(|r| r.id == c.loser && r.head == step.conclusion.negate());
                for r in opposing {
                    let fires = r.body.iter().all(|b| match b {
                        super::GroundBody::Literal(l) => eval.established(l),
                        super::GroundBody::Knowledge { satisfied, .. } => *satisfied,
                    });
                    if fires {
                        return Err(ProofError::LoserApplicable { loser: c.loser });
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{entail, NoKnowledge};
    use crate::theory::tweety;

    #[test]
    fn tweety_proof_verifies() {
        let (t, q) = tweety();
        let r = entail(&t, &q, &NoKnowledge).unwrap();
        verify_proof(&t, &q, r.label, r.proof.as_ref().unwrap(), &NoKnowledge).unwrap();
    }

    #[test]
    fn tweety_depth_counts_only_the_goal_chain() {
        let (t, q) = tweety();
        let p = entail(&t, &q, &NoKnowledge).unwrap().proof.unwrap();
        assert_eq!(p.steps.len(), 2);
        assert_eq!(p.depth(), 1);
        assert_eq!(Proof::default().depth(), 0);
    }

    #[test]
    fn tampered_step_rejected() {
        let (t, q) = tweety();
        let mut p = entail(&t, &q, &NoKnowledge).unwrap().proof.unwrap();
        p.steps[1].rule = RuleId(2);
        assert!(matches!(
            verify_proof(&t, &q, Label::Disproved, &p, &NoKnowledge),
            Err(ProofError::BadInstance { step: 1, .. })
        ));
    }

    #[test]
    fn reordered_steps_rejected() {
        let (t, q) = tweety();
        let mut p = entail(&t, &q, &NoKnowledge).unwrap().proof.unwrap();
        p.steps.swap(0, 1);
        assert!(verify_proof(&t, &q, Label::Disproved, &p, &NoKnowledge).is_err());
    }

    #[test]
    fn inverted_conflict_rejected() {
        let (t, q) = tweety();
        let mut p = entail(&t, &q, &NoKnowledge).unwrap().proof.unwrap();
        p.conflicts[0].kind = ConflictKind::Type2;
        assert!(matches!(
            verify_proof(&t, &q, Label::Disproved, &p, &NoKnowledge),
            Err(ProofError::BadPreference { .. })
        ));
    }

    #[test]
    fn wrong_label_rejected() {
        let (t, q) = tweety();
        let p = entail(&t, &q, &NoKnowledge).unwrap().proof.unwrap();
        assert!(verify_proof(&t, &q, Label::Proved, &p, &NoKnowledge).is_err());
        assert!(verify_proof(&t, &q, Label::Unknown, &p, &NoKnowledge).is_err());
    }

    #[test]
    fn proof_json_shape() {
        let (t, q) = tweety();
        let p = entail(&t, &q, &NoKnowledge).unwrap().proof.unwrap();
        let v = serde_json::to_value(&p).unwrap();
        assert_eq!(v["steps"][1]["rule"], "Rule3");
        assert_eq!(v["conflicts"][0]["kind"], "Type1");
        assert!(v["steps"][0].get("witness").is_none());
    }
}
