use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use super::{
    ground, stratify, ConflictKind, ConflictResolution, GroundBody, GroundRule, GroundRuleSet,
    KnowledgeOracle, Proof, ProofStep, SolverError, Strata,
};
use crate::theory::{Atom, DefeasibleTheory, Label, Literal, Question, RuleId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EntailmentResult {
    pub label: Label,
    pub proof: Option<Proof>,
    pub derived: BTreeSet<Literal>,
}

/// An active conflict some opposing pair of firing rules leaves unordered.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnresolvedConflict {
    pub atom: String,
    pub supporting: RuleId,
    pub opposing: RuleId,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ConsistencyReport {
    pub unresolved: Vec<UnresolvedConflict>,
}

impl ConsistencyReport {
    pub fn is_consistent(&self) -> bool {
        self.unresolved.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
enum Support {
    Fact,
    /// Index into the ground rule list of the chosen supporting instance.
    Rule(usize),
}

/// Result of stratified evaluation over a whole theory.
pub(crate) struct Evaluation<'t> {
    theory: &'t DefeasibleTheory,
    ground: GroundRuleSet,
    strata: Strata,
    /// established sign of each atom: `true` means the negative literal
    status: HashMap<Atom, bool>,
    support: HashMap<Atom, Support>,
    by_head: HashMap<Atom, Vec<usize>>,
    unresolved: Vec<UnresolvedConflict>,
}

impl<'t> Evaluation<'t> {
    pub(crate) fn run(
        theory: &'t DefeasibleTheory,
        oracle: &dyn KnowledgeOracle,
    ) -> Result<Self, SolverError> {
        let ground = ground(theory, oracle)?;
        let strata = stratify(&ground)?;

        let mut status = HashMap::new();
        let mut support = HashMap::new();
        for fact in &theory.facts {
            if let Some(&neg) = status.get(&fact.atom) {
                if neg != fact.negated {
                    let positive = if fact.negated { fact.negate() } else { fact.clone() };
                    return Err(SolverError::ContradictoryFacts(positive.to_string()));
                }
            }
            status.insert(fact.atom.clone(), fact.negated);
            support.insert(fact.atom.clone(), Support::Fact);
        }

        let mut by_head: HashMap<Atom, Vec<usize>> = HashMap::new();
        for (i, r) in ground.rules.iter().enumerate() {
            by_head.entry(r.head.atom.clone()).or_default().push(i);
        }

        let mut eval = Evaluation {
            theory,
            ground,
            strata,
            status,
            support,
            by_head,
            unresolved: Vec::new(),
        };
        let layers = std::mem::take(&mut eval.strata.layers);
        for layer in &layers {
            for atom in layer {
                eval.decide(atom);
            }
        }
        eval.strata.layers = layers;
        Ok(eval)
    }

    fn holds(&self, l: &Literal) -> bool {
        self.status.get(&l.atom) == Some(&l.negated)
    }

    fn fires(&self, r: &GroundRule) -> bool {
        r.body.iter().all(|b| match b {
            GroundBody::Literal(l) => self.holds(l),
            GroundBody::Knowledge { satisfied, .. } => *satisfied,
        })
    }

    /// Firing instances for each sign of `atom`, ordered by rule id then binding.
    fn firing(&self, atom: &Atom) -> (Vec<usize>, Vec<usize>) {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for &i in self.by_head.get(atom).map(Vec::as_slice).unwrap_or(&[]) {
            let r = &self.ground.rules[i];
            if self.fires(r) {
                if r.head.negated {
                    neg.push(i);
                } else {
                    pos.push(i);
                }
            }
        }
        let key = |i: &usize| (self.ground.rules[*i].id, self.ground.rules[*i].binding.clone());
        pos.sort_by_key(key);
        neg.sort_by_key(key);
        (pos, neg)
    }

    fn ids(&self, instances: &[usize]) -> BTreeSet<RuleId> {
        instances.iter().map(|&i| self.ground.rules[i].id).collect()
    }

    /// Every opposing firing rule is beaten by some supporting firing rule.
    fn beats_all(&self, supporting: &BTreeSet<RuleId>, opposing: &BTreeSet<RuleId>) -> bool {
        !supporting.is_empty()
            && opposing
                .iter()
                .all(|&o| supporting.iter().any(|&s| self.theory.prefers(s, o)))
    }

    fn decide(&mut self, atom: &Atom) {
        if self.status.contains_key(atom) {
            // input facts win over anything rules conclude
            return;
        }
        let (pos, neg) = self.firing(atom);
        let pos_ids = self.ids(&pos);
        let neg_ids = self.ids(&neg);

        for &s in &pos_ids {
            for &o in &neg_ids {
                if !self.theory.prefers(s, o) && !self.theory.prefers(o, s) {
                    self.unresolved.push(UnresolvedConflict {
                        atom: atom.to_string(),
                        supporting: s,
                        opposing: o,
                    });
                }
            }
        }

        let pos_wins = self.beats_all(&pos_ids, &neg_ids);
        let neg_wins = self.beats_all(&neg_ids, &pos_ids);
        let chosen = match (pos_wins, neg_wins) {
            (true, false) => Some((false, pos[0])),
            (false, true) => Some((true, neg[0])),
            _ => None,
        };
        if let Some((negated, instance)) = chosen {
            self.status.insert(atom.clone(), negated);
            self.support.insert(atom.clone(), Support::Rule(instance));
        }
    }

    pub(crate) fn derived(&self) -> BTreeSet<Literal> {
        self.status
            .iter()
            .map(|(a, &negated)| Literal {
                atom: a.clone(),
                negated,
            })
            .collect()
    }

    pub(crate) fn label(&self, q: &Literal) -> Label {
        match self.status.get(&q.atom) {
            Some(&neg) if neg == q.negated => Label::Proved,
            Some(_) => Label::Disproved,
            None => Label::Unknown,
        }
    }

    pub(crate) fn ground(&self) -> &GroundRuleSet {
        &self.ground
    }

    pub(crate) fn established(&self, l: &Literal) -> bool {
        self.holds(l)
    }

    /// Derivation of an established literal, ordered by strata then rule id,
    /// with the goal as the final step. Bodies of overridden rules that
    /// fire are derived too, so the conflict they lose is visible.
    pub(crate) fn proof_of(&self, goal: &Literal) -> Proof {
        let mut needed: BTreeMap<Atom, usize> = BTreeMap::new();
        let mut stack = vec![goal.atom.clone()];
        while let Some(atom) = stack.pop() {
            if needed.contains_key(&atom) {
                continue;
            }
            let Some(Support::Rule(i)) = self.support.get(&atom) else {
                continue;
            };
            needed.insert(atom.clone(), *i);
            let mut bodies = vec![*i];
            let conclusion = Literal {
                atom: atom.clone(),
                negated: self.status[&atom],
            };
            for c in self.resolutions(&conclusion, self.ground.rules[*i].id) {
                if c.kind == ConflictKind::Type1 {
                    bodies.extend(self.firing_instance(&conclusion.negate(), c.loser));
                }
            }
            for j in bodies {
                for b in &self.ground.rules[j].body {
                    if let GroundBody::Literal(l) = b {
                        stack.push(l.atom.clone());
                    }
                }
            }
        }

        let mut order: Vec<(&Atom, usize)> = needed.iter().map(|(a, &i)| (a, i)).collect();
        order.sort_by_key(|(a, i)| {
            (
                *a == &goal.atom,
                self.strata.level(a).unwrap_or(0),
                self.ground.rules[*i].id,
                (*a).clone(),
            )
        });

        let mut steps = Vec::with_capacity(order.len());
        let mut conflicts = Vec::new();
        for (atom, i) in order {
            let r = &self.ground.rules[i];
            let conclusion = Literal {
                atom: atom.clone(),
                negated: self.status[atom],
            };
            conflicts.extend(self.resolutions(&conclusion, r.id));
            steps.push(ProofStep {
                rule: r.id,
                premises: r.body.iter().map(|b| b.literal().clone()).collect(),
                conclusion,
                witness: match r.template {
                    crate::theory::TemplateKind::T6 => r.binding.clone(),
                    _ => None,
                },
            });
        }
        Proof { steps, conflicts }
    }

    /// First firing instance of rule `id` concluding `head`.
    fn firing_instance(&self, head: &Literal, id: RuleId) -> Option<usize> {
        let (pos, neg) = self.firing(&head.atom);
        let side = if head.negated { neg } else { pos };
        side.into_iter().find(|&i| self.ground.rules[i].id == id)
    }

    /// Conflicts settled when `chosen` concluded `conclusion`.
    fn resolutions(&self, conclusion: &Literal, chosen: RuleId) -> Vec<ConflictResolution> {
        let (pos, neg) = self.firing(&conclusion.atom);
        let (supporting, opposing_firing) = if conclusion.negated {
            (self.ids(&neg), self.ids(&pos))
        } else {
            (self.ids(&pos), self.ids(&neg))
        };
        let opposing: BTreeSet<RuleId> = self
            .by_head
            .get(&conclusion.atom)
            .map(Vec::as_slice)
            .unwrap_or(&[])
            .iter()
            .map(|&i| &self.ground.rules[i])
            .filter(|r| r.head.negated != conclusion.negated)
            .map(|r| r.id)
            .collect();

        let mut out = Vec::new();
        for o in opposing {
            if self.theory.prefers(chosen, o) {
                out.push(ConflictResolution {
                    winner: chosen,
                    loser: o,
                    kind: ConflictKind::Type1,
                });
            } else if opposing_firing.contains(&o) {
                if let Some(&w) = supporting.iter().find(|&&s| self.theory.prefers(s, o)) {
                    out.push(ConflictResolution {
                        winner: w,
                        loser: o,
                        kind: ConflictKind::Type1,
                    });
                }
            } else if self.theory.prefers(o, chosen) {
                out.push(ConflictResolution {
                    winner: chosen,
                    loser: o,
                    kind: ConflictKind::Type2,
                });
            }
        }
        out
    }
}

/// Decides `q` against `t`, with a proof when the answer is not unknown.
pub fn entail(
    t: &DefeasibleTheory,
    q: &Question,
    oracle: &dyn KnowledgeOracle,
) -> Result<EntailmentResult, SolverError> {
    let eval = Evaluation::run(t, oracle)?;
    let q = q.literal();
    let label = eval.label(q);
    let proof = match label {
        Label::Proved => Some(eval.proof_of(q)),
        Label::Disproved => Some(eval.proof_of(&q.negate())),
        Label::Unknown => None,
    };
    Ok(EntailmentResult {
        label,
        proof,
        derived: eval.derived(),
    })
}

/// Reports every active conflict with an unordered opposing pair.
pub fn check_defeasible_consistency(
    t: &DefeasibleTheory,
    oracle: &dyn KnowledgeOracle,
) -> Result<ConsistencyReport, SolverError> {
    let eval = Evaluation::run(t, oracle)?;
    Ok(ConsistencyReport {
        unresolved: eval.unresolved,
    })
}
