//! Exhaustive guess-and-check evaluation.
//!
//! Every atom some rule concludes is guessed as positive, negative or
//! undecided. A guess is accepted when, read as the set of established
//! literals, it reproduces itself under the defeat condition: an atom takes
//! a sign exactly when some rule for that sign fires and each firing rule for
//! the other sign is beaten by a firing rule for this sign. Acyclic theories
//! have exactly one such guess. Nothing here shares code with the stratified
//! path beyond the theory types.

use std::collections::{BTreeSet, HashMap, HashSet};

use super::{KnowledgeOracle, SolverError, UnknownCategory};
use crate::theory::{Atom, DefeasibleTheory, Entity, Label, Literal, Question, RuleId, Term};

pub const DEFAULT_ATOM_BOUND: usize = 24;

/// Upper bound on the number of guesses tried.
const CANDIDATE_CAP: u64 = 2_000_000;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Value {
    Undecided,
    Pos,
    Neg,
}

struct Instance {
    id: RuleId,
    /// (atom index, negated); foreign literals are folded into `enabled`.
    body: Vec<(usize, bool)>,
    head: usize,
    head_neg: bool,
    enabled: bool,
}

pub fn brute_force_entail(
    t: &DefeasibleTheory,
    q: &Question,
    oracle: &dyn KnowledgeOracle,
    bound: usize,
) -> Result<Label, SolverError> {
    let mut entities: BTreeSet<Entity> = BTreeSet::new();
    let lits = t
        .facts
        .iter()
        .chain(t.rules.iter().flat_map(|r| r.body.iter().chain(std::iter::once(&r.head))));
    for l in lits {
        if let Term::Entity(e) = &l.atom.subject {
            entities.insert(e.clone());
        }
        if let Some(o) = &l.atom.object {
            entities.insert(o.clone());
        }
        if let Some(f) = l.atom.predicate.as_foreign() {
            entities.extend(f.refs.iter().cloned());
        }
    }

    let mut index: HashMap<Atom, usize> = HashMap::new();
    let mut intern = |a: &Atom| -> usize {
        let n = index.len();
        *index.entry(a.clone()).or_insert(n)
    };

    let mut fixed: HashMap<usize, bool> = HashMap::new();
    for f in &t.facts {
        let i = intern(&f.atom);
        if let Some(&prev) = fixed.get(&i) {
            if prev != f.negated {
                return Err(SolverError::ContradictoryFacts(f.atom.to_string()));
            }
        }
        fixed.insert(i, f.negated);
    }

    let mut instances = Vec::new();
    for rule in &t.rules {
        let has_var = rule
            .body
            .iter()
            .chain(std::iter::once(&rule.head))
            .any(|l| l.atom.subject == Term::Var);
        let subs: Vec<Option<&Entity>> = if has_var {
            entities.iter().map(Some).collect()
        } else {
            vec![None]
        };
        for sub in subs {
            let subst = |l: &Literal| -> Literal {
                let mut l = l.clone();
                if let (Term::Var, Some(e)) = (&l.atom.subject, sub) {
                    l.atom.subject = Term::Entity(e.clone());
                }
                l
            };
            let mut enabled = true;
            let mut body = Vec::new();
            for b in &rule.body {
                let b = subst(b);
                if let Some(f) = b.atom.predicate.as_foreign() {
                    let subject = match &b.atom.subject {
                        Term::Entity(e) => e,
                        Term::Var => unreachable!("substituted above"),
                    };
                    let verdict = oracle.evaluate(subject, f, &t.facts).map_err(
                        |UnknownCategory(category)| SolverError::UnresolvedForeignLiteral {
                            literal: b.to_string(),
                            category,
                        },
                    )?;
                    enabled &= verdict == Some(!b.negated);
                } else {
                    body.push((intern(&b.atom), b.negated));
                }
            }
            let head = subst(&rule.head);
            instances.push(Instance {
                id: rule.id,
                body,
                head: intern(&head.atom),
                head_neg: head.negated,
                enabled,
            });
        }
    }
    let q_atom = intern(&q.literal().atom);

    if index.len() > bound {
        return Err(SolverError::TooLarge {
            size: index.len(),
            bound,
        });
    }

    // guessable atoms with the values rules could give them
    let mut options: Vec<(usize, Vec<Value>)> = Vec::new();
    let heads: BTreeSet<usize> = instances.iter().map(|r| r.head).collect();
    for &h in &heads {
        if fixed.contains_key(&h) {
            continue;
        }
        let mut vals = vec![Value::Undecided];
        if instances.iter().any(|r| r.head == h && !r.head_neg) {
            vals.push(Value::Pos);
        }
        if instances.iter().any(|r| r.head == h && r.head_neg) {
            vals.push(Value::Neg);
        }
        options.push((h, vals));
    }
    let total = options
        .iter()
        .try_fold(1u64, |acc, (_, v)| acc.checked_mul(v.len() as u64))
        .filter(|&n| n <= CANDIDATE_CAP);
    if total.is_none() {
        return Err(SolverError::TooLarge {
            size: index.len(),
            bound,
        });
    }

    let prefs: HashSet<(RuleId, RuleId)> =
        t.preferences.iter().map(|p| (p.winner, p.loser)).collect();

    let mut value = vec![Value::Undecided; index.len()];
    for (&i, &neg) in &fixed {
        value[i] = if neg { Value::Neg } else { Value::Pos };
    }
    let mut digits = vec![0usize; options.len()];
    let mut accepted: Vec<Value> = Vec::new();
    let mut count = 0usize;
    loop {
        for (d, (atom, vals)) in digits.iter().zip(&options) {
            value[*atom] = vals[*d];
        }
        if is_fixpoint(&value, &options, &instances, &prefs) {
            count += 1;
            if count == 1 {
                accepted = value.clone();
            }
        }
        // advance the mixed-radix counter
        let mut k = 0;
        while k < digits.len() {
            digits[k] += 1;
            if digits[k] < options[k].1.len() {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
        if k == digits.len() {
            break;
        }
    }

    if count != 1 {
        return Err(SolverError::NotUnique(count));
    }
    let want = if q.literal().negated {
        Value::Neg
    } else {
        Value::Pos
    };
    Ok(match accepted[q_atom] {
        Value::Undecided => Label::Unknown,
        v if v == want => Label::Proved,
        _ => Label::Disproved,
    })
}

fn is_fixpoint(
    value: &[Value],
    options: &[(usize, Vec<Value>)],
    instances: &[Instance],
    prefs: &HashSet<(RuleId, RuleId)>,
) -> bool {
    let holds = |&(a, neg): &(usize, bool)| {
        value[a] == if neg { Value::Neg } else { Value::Pos }
    };
    for (atom, _) in options {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for r in instances {
            if r.head == *atom && r.enabled && r.body.iter().all(holds) {
                if r.head_neg {
                    neg.push(r.id);
                } else {
                    pos.push(r.id);
                }
            }
        }
        let wins = |us: &[RuleId], them: &[RuleId]| {
            !us.is_empty()
                && them
                    .iter()
                    .all(|o| us.iter().any(|s| prefs.contains(&(*s, *o))))
        };
        let expected = match (wins(&pos, &neg), wins(&neg, &pos)) {
            (true, false) => Value::Pos,
            (false, true) => Value::Neg,
            _ => Value::Undecided,
        };
        if value[*atom] != expected {
            return false;
        }
    }
    true
}
