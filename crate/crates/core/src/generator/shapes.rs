//! Structural rule shapes used when expanding a goal backwards.

use std::collections::BTreeMap;

use super::{EntityPool, GenError};
use crate::rng::DetRng;
use crate::theory::{Entity, Literal, Predicate, Term, TemplateKind};

pub struct ShapeCtx<'a> {
    pub rng: &'a mut DetRng,
    pub pool: &'a mut EntityPool,
    pub predicates: &'a [String],
}

impl ShapeCtx<'_> {
    /// Body literal with a random predicate and sign.
    pub fn literal(&mut self, subject: Term, object: Entity) -> Literal {
        let p = self.rng.pick(self.predicates).clone();
        let negated = self.rng.chance(0.5);
        Literal::new(subject, Predicate::Known(p), Some(object), negated)
    }

    pub fn fresh(&mut self) -> Result<Entity, GenError> {
        self.pool.take()
    }
}

/// Instantiated rule body and the ground literals that make it fire.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expansion {
    pub body: Vec<Literal>,
    pub subgoals: Vec<Literal>,
}

pub trait RuleShape: Send + Sync {
    fn kind(&self) -> TemplateKind;

    /// A body for a rule concluding the ground literal `head`.
    fn expand(&self, head: &Literal, ctx: &mut ShapeCtx<'_>) -> Result<Expansion, GenError>;

    /// Head as stored in the rule; quantified shapes replace the subject.
    fn rule_head(&self, head: &Literal) -> Literal {
        head.clone()
    }
}

fn subject_entity(head: &Literal) -> Entity {
    head.subject()
        .as_entity()
        .cloned()
        .expect("generation goals are ground")
}

fn lift(head: &Literal) -> Literal {
    let mut h = head.clone();
    h.atom.subject = Term::Var;
    h
}

/// `forall X: (X,p1,e1) => (X,p2,e2)`
pub struct Universal1;

impl RuleShape for Universal1 {
    fn kind(&self) -> TemplateKind {
        TemplateKind::T1
    }

    fn expand(&self, head: &Literal, ctx: &mut ShapeCtx<'_>) -> Result<Expansion, GenError> {
        let s = subject_entity(head);
        let e1 = ctx.fresh()?;
        let b = ctx.literal(Term::Var, e1);
        Ok(Expansion {
            subgoals: vec![b.bind(&s)],
            body: vec![b],
        })
    }

    fn rule_head(&self, head: &Literal) -> Literal {
        lift(head)
    }
}

/// `forall X: (X,p1,e1) & (X,p2,e2) => (X,p3,e3)`
pub struct Universal2;

impl RuleShape for Universal2 {
    fn kind(&self) -> TemplateKind {
        TemplateKind::T2
    }

    fn expand(&self, head: &Literal, ctx: &mut ShapeCtx<'_>) -> Result<Expansion, GenError> {
        let s = subject_entity(head);
        let e1 = ctx.fresh()?;
        let e2 = ctx.fresh()?;
        let body = vec![ctx.literal(Term::Var, e1), ctx.literal(Term::Var, e2)];
        Ok(Expansion {
            subgoals: body.iter().map(|b| b.bind(&s)).collect(),
            body,
        })
    }

    fn rule_head(&self, head: &Literal) -> Literal {
        lift(head)
    }
}

/// `(e1,p1,e2) => (e2,p2,e3)`
pub struct Chain;

impl RuleShape for Chain {
    fn kind(&self) -> TemplateKind {
        TemplateKind::T3
    }

    fn expand(&self, head: &Literal, ctx: &mut ShapeCtx<'_>) -> Result<Expansion, GenError> {
        let s = subject_entity(head);
        let e1 = ctx.fresh()?;
        let b = ctx.literal(Term::Entity(e1), s);
        Ok(Expansion {
            body: vec![b.clone()],
            subgoals: vec![b],
        })
    }
}

/// `(e1,p1,e2) & (e3,p2,e2) => (e2,p3,e4)`
pub struct Join;

impl RuleShape for Join {
    fn kind(&self) -> TemplateKind {
        TemplateKind::T4
    }

    fn expand(&self, head: &Literal, ctx: &mut ShapeCtx<'_>) -> Result<Expansion, GenError> {
        let s = subject_entity(head);
        let e1 = ctx.fresh()?;
        let e3 = ctx.fresh()?;
        let body = vec![
            ctx.literal(Term::Entity(e1), s.clone()),
            ctx.literal(Term::Entity(e3), s),
        ];
        Ok(Expansion {
            subgoals: body.clone(),
            body,
        })
    }
}

/// `exists X: (X,p1,e1) => (e2,p2,e3)`
pub struct Existential;

impl RuleShape for Existential {
    fn kind(&self) -> TemplateKind {
        TemplateKind::T6
    }

    fn expand(&self, _head: &Literal, ctx: &mut ShapeCtx<'_>) -> Result<Expansion, GenError> {
        let e1 = ctx.fresh()?;
        let witness = ctx.fresh()?;
        let b = ctx.literal(Term::Var, e1);
        Ok(Expansion {
            subgoals: vec![b.bind(&witness)],
            body: vec![b],
        })
    }
}

pub struct ShapeRegistry {
    shapes: BTreeMap<TemplateKind, Box<dyn RuleShape>>,
}

impl ShapeRegistry {
    pub fn empty() -> Self {
        Self {
            shapes: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(Universal1));
        r.register(Box::new(Universal2));
        r.register(Box::new(Chain));
        r.register(Box::new(Join));
        r.register(Box::new(Existential));
        r
    }

    pub fn register(&mut self, shape: Box<dyn RuleShape>) {
        self.shapes.insert(shape.kind(), shape);
    }

    pub fn get(&self, kind: TemplateKind) -> Option<&dyn RuleShape> {
        self.shapes.get(&kind).map(|b| b.as_ref())
    }

    pub fn kinds(&self) -> Vec<TemplateKind> {
        self.shapes.keys().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::{validate_theory, DefeasibleTheory, Rule, RuleId};

    #[test]
    fn every_shape_builds_a_valid_rule_whose_subgoals_fire_it() {
        let reg = ShapeRegistry::builtin();
        assert_eq!(reg.kinds().len(), 5);
        let names: Vec<String> = (0..40).map(|i| format!("e{i}")).collect();
        let preds = vec!["hug".to_string(), "call".to_string()];
        for (i, kind) in reg.kinds().into_iter().enumerate() {
            let mut rng = DetRng::new(i as u64);
            let mut pool = EntityPool::new(&names, &mut rng);
            let head = Literal::triple("cat", "respect", Some("dog"), false);
            let shape = reg.get(kind).unwrap();
            let mut ctx = ShapeCtx {
                rng: &mut rng,
                pool: &mut pool,
                predicates: &preds,
            };
            let x = shape.expand(&head, &mut ctx).unwrap();
            let rule = Rule::new(RuleId(1), kind, x.body.clone(), shape.rule_head(&head));
            let t = DefeasibleTheory {
                facts: x.subgoals.clone(),
                rules: vec![rule],
                preferences: vec![],
            };
            assert!(validate_theory(&t).is_clean(), "{kind:?}");
            let q = crate::theory::Question::new(head).unwrap();
            let r = crate::solver::entail(&t, &q, &crate::solver::NoKnowledge).unwrap();
            assert_eq!(r.label, crate::theory::Label::Proved, "{kind:?}");
        }
    }
}
