//! Random small theories for comparing the stratified solver with exhaustive
//! evaluation.
//!
//! Three entities and seven predicates give at most 21 in-vocabulary atoms,
//! plus at most three age facts. Predicate `pN` only appears in heads of
//! rules whose bodies use `p0..pN-1`, so every theory is acyclic.
#![allow(dead_code)]

use boardlogic::rng::DetRng;
use boardlogic::theory::{
    DefeasibleTheory, Entity, ForeignPredicate, Literal, Predicate, Preference, Question, Rule,
    RuleId, TemplateKind, Term,
};

pub const ENTITIES: [&str; 3] = ["a", "b", "c"];
pub const PREDICATES: usize = 7;

fn pred(i: usize) -> String {
    format!("p{i}")
}

/// `p6` is binary with the fixed object `c`; the rest are unary.
fn atom_lit(subject: Term, p: usize, negated: bool) -> Literal {
    let object = (p == 6).then(|| Entity::new("c").unwrap());
    Literal::new(subject, Predicate::known(&pred(p)), object, negated)
}

fn index_of(l: &Literal) -> usize {
    match l.predicate() {
        Predicate::Known(name) => name[1..].parse().unwrap(),
        Predicate::Foreign(_) => unreachable!("heads are in-vocabulary"),
    }
}

fn entity(rng: &mut DetRng) -> Term {
    Term::entity(rng.pick(&ENTITIES))
}

fn age_fact(subject: &str, rng: &mut DetRng) -> Literal {
    let (value, unit) = match rng.below(3) {
        0 => (rng.range(2, 60) as f64 / 2.0, "month"),
        1 => (rng.range(1, 80) as f64, "week"),
        _ => (rng.range(1, 6) as f64, "year"),
    };
    Literal::new(
        Term::entity(subject),
        Predicate::Foreign(ForeignPredicate {
            category: "age".into(),
            relation: "age".into(),
            args: vec![value.to_string(), unit.into()],
            refs: vec![],
            phrase: format!("is {value} {unit}s old"),
        }),
        None,
        false,
    )
}

fn age_body(subject: Term, rng: &mut DetRng) -> Literal {
    let relation = if rng.chance(0.5) { "older_than" } else { "younger_than" };
    let years = rng.range(1, 3);
    Literal::new(
        subject,
        Predicate::Foreign(ForeignPredicate {
            category: "age".into(),
            relation: relation.into(),
            args: vec![years.to_string(), "year".into()],
            refs: vec![],
            phrase: format!("is {relation} {years} years"),
        }),
        None,
        rng.chance(0.2),
    )
}

#[derive(Clone, Copy, PartialEq)]
enum Shape {
    Universal,
    Ground,
    Existential,
}

pub fn random_theory(seed: u64) -> (DefeasibleTheory, Question) {
    let mut rng = DetRng::new(seed);
    let mut t = DefeasibleTheory::default();

    let n_facts = rng.range(1, 6);
    for _ in 0..n_facts {
        // mostly low predicates, sometimes a fact on a rule head
        let p = if rng.chance(0.85) { rng.below(3) } else { rng.below(PREDICATES) };
        let f = atom_lit(entity(&mut rng), p, rng.chance(0.3));
        if !t.facts.iter().any(|g| g.atom == f.atom) {
            t.facts.push(f);
        }
    }
    let with_age = rng.chance(0.3);
    if with_age {
        for e in ENTITIES {
            if rng.chance(0.6) {
                t.facts.push(age_fact(e, &mut rng));
            }
        }
    }

    let n_rules = rng.range(1, 6) as u32;
    for id in 1..=n_rules {
        // half the rules contradict an earlier head
        let earlier = (!t.rules.is_empty() && rng.chance(0.5)).then(|| rng.pick(&t.rules).head.clone());
        let h = match &earlier {
            Some(l) => index_of(l),
            None => rng.range(1, PREDICATES as u64 - 1) as usize,
        };
        let two = h >= 2 && rng.chance(0.4);
        let shape = match rng.below(5) {
            0 | 1 => Shape::Universal,
            2 | 3 => Shape::Ground,
            _ => Shape::Existential,
        };
        let body_subject = |rng: &mut DetRng| match shape {
            Shape::Ground => entity(rng),
            _ => Term::Var,
        };
        let mut body = Vec::new();
        for _ in 0..if two { 2 } else { 1 } {
            let s = body_subject(&mut rng);
            if with_age && rng.chance(0.2) {
                body.push(age_body(s, &mut rng));
            } else {
                body.push(atom_lit(s, rng.below(h), rng.chance(0.25)));
            }
        }
        if body.iter().all(|l| l.is_foreign()) && shape != Shape::Ground {
            // keep a variable rule anchored on an in-vocabulary literal
            body.push(atom_lit(Term::Var, rng.below(h), false));
        }
        let head_subject = match shape {
            Shape::Universal => Term::Var,
            _ => entity(&mut rng),
        };
        let negated = match &earlier {
            Some(l) => !l.negated,
            None => rng.chance(0.4),
        };
        let head = atom_lit(head_subject, h, negated);
        let template = match (shape, body.len()) {
            (Shape::Universal, 1) => TemplateKind::T1,
            (Shape::Universal, _) => TemplateKind::T2,
            (Shape::Ground, 1) => TemplateKind::T3,
            (Shape::Ground, _) => TemplateKind::T4,
            (Shape::Existential, _) => TemplateKind::T6,
        };
        t.rules.push(Rule::new(RuleId(id), template, body, head));
    }

    for i in 0..t.rules.len() {
        for j in i + 1..t.rules.len() {
            let (r, s) = (&t.rules[i], &t.rules[j]);
            let opposing = r.head.predicate() == s.head.predicate() && r.head.negated != s.head.negated;
            if opposing && rng.chance(0.75) {
                let (w, l) = if rng.chance(0.5) { (r.id, s.id) } else { (s.id, r.id) };
                t.preferences.push(Preference::new(w, l));
            }
        }
    }

    let p = if rng.chance(0.8) {
        index_of(&rng.pick(&t.rules).head)
    } else {
        rng.below(PREDICATES)
    };
    let q = Question::new(atom_lit(entity(&mut rng), p, rng.chance(0.5))).unwrap();
    (t, q)
}
