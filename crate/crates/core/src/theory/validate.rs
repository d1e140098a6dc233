use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;

use super::{DefeasibleTheory, Literal, Rule, RuleId, TemplateKind, Term};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NonGroundFact { fact: String },
    ContradictoryFacts { fact: String },
    DuplicateRuleId { rule: RuleId },
    DanglingPreference { rule: RuleId },
    SelfPreference { rule: RuleId },
    DuplicatePreference { winner: RuleId, loser: RuleId },
    SymmetricPreference { a: RuleId, b: RuleId },
    MalformedTemplate { rule: RuleId, reason: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonGroundFact { fact } => write!(f, "fact {fact} is not ground"),
            Violation::ContradictoryFacts { fact } => {
                write!(f, "facts contain both {fact} and its negation")
            }
            Violation::DuplicateRuleId { rule } => write!(f, "{rule} defined more than once"),
            Violation::DanglingPreference { rule } => {
                write!(f, "preference references undefined {rule}")
            }
            Violation::SelfPreference { rule } => write!(f, "{rule} preferred over itself"),
            Violation::DuplicatePreference { winner, loser } => {
                write!(f, "preference {winner} > {loser} stated twice")
            }
            Violation::SymmetricPreference { a, b } => {
                write!(f, "both {a} > {b} and {b} > {a}")
            }
            Violation::MalformedTemplate { rule, reason } => write!(f, "{rule}: {reason}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every well-formedness problem of `t`; an empty report means clean.
pub fn validate_theory(t: &DefeasibleTheory) -> ValidationReport {
    let mut violations = Vec::new();

    let mut seen: HashSet<&Literal> = HashSet::new();
    let mut reported = BTreeSet::new();
    for fact in &t.facts {
        if !fact.is_ground() {
            violations.push(Violation::NonGroundFact {
                fact: fact.to_string(),
            });
        }
        seen.insert(fact);
    }
    for fact in &t.facts {
        if !fact.negated && seen.contains(&fact.negate()) && reported.insert(fact.to_string()) {
            violations.push(Violation::ContradictoryFacts {
                fact: fact.to_string(),
            });
        }
    }

    let mut ids = HashSet::new();
    for rule in &t.rules {
        if !ids.insert(rule.id) {
            violations.push(Violation::DuplicateRuleId { rule: rule.id });
        }
        if let Err(reason) = check_template(rule) {
            violations.push(Violation::MalformedTemplate {
                rule: rule.id,
                reason,
            });
        }
    }

    let mut prefs = HashSet::new();
    for p in &t.preferences {
        for id in [p.winner, p.loser] {
            if !ids.contains(&id) {
                violations.push(Violation::DanglingPreference { rule: id });
            }
        }
        if p.winner == p.loser {
            violations.push(Violation::SelfPreference { rule: p.winner });
        }
        if !prefs.insert((p.winner, p.loser)) {
            violations.push(Violation::DuplicatePreference {
                winner: p.winner,
                loser: p.loser,
            });
        }
    }
    let mut symmetric = BTreeSet::new();
    for &(w, l) in &prefs {
        if w != l && prefs.contains(&(l, w)) {
            symmetric.insert((w.min(l), w.max(l)));
        }
    }
    for (a, b) in symmetric {
        violations.push(Violation::SymmetricPreference { a, b });
    }

    ValidationReport { violations }
}

fn check_template(rule: &Rule) -> Result<(), String> {
    let kind = rule.template;
    if rule.quantifier != kind.quantifier() {
        return Err(format!(
            "{} requires quantifier {:?}, found {:?}",
            kind.name(),
            kind.quantifier(),
            rule.quantifier
        ));
    }
    if rule.body.len() != kind.body_len() {
        return Err(format!(
            "{} requires {} body literal(s), found {}",
            kind.name(),
            kind.body_len(),
            rule.body.len()
        ));
    }
    if rule.head.is_foreign() {
        return Err("head uses an out-of-vocabulary predicate".into());
    }
    let body_vars = rule.body.iter().filter(|l| l.subject() == &Term::Var).count();
    let head_var = rule.head.subject() == &Term::Var;
    let foreign = rule.body.iter().filter(|l| l.is_foreign()).count();
    match kind {
        TemplateKind::T1 | TemplateKind::T2 => {
            if body_vars != rule.body.len() || !head_var {
                return Err("universal rule must bind X in every body literal and the head".into());
            }
        }
        TemplateKind::T6 => {
            if body_vars != 1 || head_var {
                return Err("existential rule binds X in the body only".into());
            }
        }
        TemplateKind::T3 | TemplateKind::T4 | TemplateKind::T5 => {
            if body_vars > 0 || head_var {
                return Err("template must be fully ground".into());
            }
        }
    }
    match (kind, foreign) {
        (TemplateKind::T5, 0) => Err("T5 body needs an out-of-vocabulary predicate".into()),
        (TemplateKind::T5, _) => Ok(()),
        (_, 0) => Ok(()),
        _ => Err("only T5 bodies may use out-of-vocabulary predicates".into()),
    }
}
