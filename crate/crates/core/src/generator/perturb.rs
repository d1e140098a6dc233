//! Perturbing a decided theory until its question becomes unknown.

use super::GenError;
use crate::knowledge::KnowledgeRegistry;
use crate::rng::DetRng;
use crate::solver::{entail, Proof};
use crate::theory::{validate_theory, DefeasibleTheory, Label, Literal, Predicate, Preference, Question, Term};

pub const PERTURBATION_BUDGET: usize = 200;

/// Chance of aiming a perturbation at something the current proof uses.
const TARGET_PROOF: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Predicate,
    Sign,
    Replace,
    FlipPreference,
    Knowledge,
}

/// Facts, rules and preferences the current proof relies on.
struct Focus {
    facts: Vec<usize>,
    rules: Vec<usize>,
    preferences: Vec<usize>,
}

fn focus(t: &DefeasibleTheory, proof: Option<&Proof>) -> Focus {
    let Some(p) = proof else {
        return Focus {
            facts: vec![],
            rules: vec![],
            preferences: vec![],
        };
    };
    let premises: Vec<&Literal> = p.steps.iter().flat_map(|s| s.premises.iter()).collect();
    let facts = t
        .facts
        .iter()
        .enumerate()
        .filter(|(_, f)| {
            premises.iter().any(|&pr| {
                if pr == *f {
                    return true;
                }
                // surface facts behind a knowledge premise
                let (Some(a), Some(b)) = (pr.predicate().as_foreign(), f.predicate().as_foreign()) else {
                    return false;
                };
                a.category == b.category
                    && f.subject().as_entity().is_some_and(|s| {
                        pr.subject().as_entity() == Some(s) || a.refs.contains(s)
                    })
            })
        })
        .map(|(i, _)| i)
        .collect();
    let used: Vec<_> = p
        .steps
        .iter()
        .map(|s| s.rule)
        .chain(p.conflicts.iter().flat_map(|c| [c.winner, c.loser]))
        .collect();
    let rules = t
        .rules
        .iter()
        .enumerate()
        .filter(|(_, r)| used.contains(&r.id))
        .map(|(i, _)| i)
        .collect();
    let preferences = t
        .preferences
        .iter()
        .enumerate()
        .filter(|(_, pr)| {
            p.conflicts.iter().any(|c| {
                (pr.winner == c.winner && pr.loser == c.loser) || (pr.winner == c.loser && pr.loser == c.winner)
            })
        })
        .map(|(i, _)| i)
        .collect();
    Focus {
        facts,
        rules,
        preferences,
    }
}

fn choose(rng: &mut DetRng, focused: &[usize], len: usize) -> Option<usize> {
    if len == 0 {
        return None;
    }
    if !focused.is_empty() && rng.chance(TARGET_PROOF) {
        Some(*rng.pick(focused))
    } else {
        Some(rng.below(len))
    }
}

fn other_predicate(rng: &mut DetRng, predicates: &[String], current: &Predicate) -> Option<Predicate> {
    let options: Vec<&String> = predicates
        .iter()
        .filter(|p| !matches!(current, Predicate::Known(c) if c == *p))
        .collect();
    (!options.is_empty()).then(|| Predicate::Known(rng.pick(&options).to_string()))
}

/// Applies one random perturbation in place and describes it.
fn apply(
    t: &mut DefeasibleTheory,
    f: &Focus,
    predicates: &[String],
    knowledge: &KnowledgeRegistry,
    rng: &mut DetRng,
) -> Option<String> {
    let mut ops = vec![Op::Predicate, Op::Sign, Op::Replace];
    if !t.preferences.is_empty() {
        ops.push(Op::FlipPreference);
    }
    let foreign: Vec<usize> = (0..t.facts.len()).filter(|&i| t.facts[i].is_foreign()).collect();
    if !foreign.is_empty() {
        ops.push(Op::Knowledge);
    }
    match *rng.pick(&ops) {
        Op::Predicate => {
            // Facts and rule bodies only; rewriting heads could make two
            // unrelated rules oppose each other.
            if t.rules.is_empty() || rng.chance(0.5) {
                let i = choose(rng, &f.facts, t.facts.len())?;
                let fact = &mut t.facts[i];
                if fact.is_foreign() {
                    return None;
                }
                fact.atom.predicate = other_predicate(rng, predicates, fact.predicate())?;
                Some(format!("predicate:fact:{i}"))
            } else {
                let i = choose(rng, &f.rules, t.rules.len())?;
                let rule = &mut t.rules[i];
                let j = rng.below(rule.body.len());
                let lit = &mut rule.body[j];
                if lit.is_foreign() {
                    return None;
                }
                lit.atom.predicate = other_predicate(rng, predicates, lit.predicate())?;
                Some(format!("predicate:{}:body{j}", rule.id))
            }
        }
        Op::Sign => {
            if t.rules.is_empty() || rng.chance(0.5) {
                let i = choose(rng, &f.facts, t.facts.len())?;
                if t.facts[i].is_foreign() {
                    return None;
                }
                t.facts[i] = t.facts[i].negate();
                Some(format!("sign:fact:{i}"))
            } else {
                let i = choose(rng, &f.rules, t.rules.len())?;
                let rule = &mut t.rules[i];
                let j = rng.below(rule.body.len() + 1);
                if j == rule.body.len() {
                    rule.head = rule.head.negate();
                    Some(format!("sign:{}:head", rule.id))
                } else {
                    rule.body[j] = rule.body[j].negate();
                    Some(format!("sign:{}:body{j}", rule.id))
                }
            }
        }
        Op::Replace => {
            let i = choose(rng, &f.facts, t.facts.len())?;
            let universe = t.universe();
            if universe.len() < 2 {
                return None;
            }
            let s = rng.pick(&universe).clone();
            let others: Vec<_> = universe.iter().filter(|e| **e != s).collect();
            let o = (*rng.pick(&others)).clone();
            let p = rng.pick(predicates).clone();
            t.facts[i] = Literal::new(Term::Entity(s), Predicate::Known(p), Some(o), rng.chance(0.5));
            Some(format!("replace:fact:{i}"))
        }
        Op::FlipPreference => {
            let i = choose(rng, &f.preferences, t.preferences.len())?;
            let p = t.preferences[i];
            t.preferences[i] = Preference::new(p.loser, p.winner);
            Some(format!("flip:{}>{}", p.winner, p.loser))
        }
        Op::Knowledge => {
            let focused: Vec<usize> = f.facts.iter().copied().filter(|i| foreign.contains(i)).collect();
            let i = if !focused.is_empty() && rng.chance(TARGET_PROOF) {
                *rng.pick(&focused)
            } else {
                *rng.pick(&foreign)
            };
            let category = t.facts[i].predicate().as_foreign()?.category.clone();
            let new = knowledge.get(&category)?.perturb_fact(&t.facts[i], rng)?;
            t.facts[i] = new;
            Some(format!("knowledge:fact:{i}"))
        }
    }
}

/// Applies random perturbations, keeping each one that leaves a valid,
/// solvable theory, until `q` is unknown. Returns the theory and the trace.
pub fn perturb_to_unknown(
    theory: &DefeasibleTheory,
    q: &Question,
    predicates: &[String],
    knowledge: &KnowledgeRegistry,
    rng: &mut DetRng,
) -> Result<(DefeasibleTheory, Vec<String>), GenError> {
    let base = entail(theory, q, knowledge)?;
    if base.label == Label::Unknown {
        return Err(GenError::AlreadyUnknown);
    }
    let mut current = theory.clone();
    let mut proof = base.proof;
    let mut trace = Vec::new();
    for _ in 0..PERTURBATION_BUDGET {
        let mut candidate = current.clone();
        let f = focus(&current, proof.as_ref());
        let Some(step) = apply(&mut candidate, &f, predicates, knowledge, rng) else {
            continue;
        };
        if !validate_theory(&candidate).is_clean() {
            continue;
        }
        let Ok(r) = entail(&candidate, q, knowledge) else {
            continue;
        };
        current = candidate;
        trace.push(step);
        if r.label == Label::Unknown {
            return Ok((current, trace));
        }
        proof = r.proof;
    }
    Err(GenError::PerturbationBudgetExhausted(PERTURBATION_BUDGET))
}
