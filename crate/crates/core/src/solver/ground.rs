use serde::Serialize;

use super::{foreign_satisfied, KnowledgeOracle, SolverError};
use crate::theory::{DefeasibleTheory, Entity, Literal, Quantifier, RuleId, TemplateKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum GroundBody {
    Literal(Literal),
    /// Out-of-vocabulary literal already decided by the knowledge oracle.
    Knowledge { literal: Literal, satisfied: bool },
}

impl GroundBody {
    pub fn literal(&self) -> &Literal {
        match self {
            GroundBody::Literal(l) | GroundBody::Knowledge { literal: l, .. } => l,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GroundRule {
    pub id: RuleId,
    pub template: TemplateKind,
    pub body: Vec<GroundBody>,
    pub head: Literal,
    /// Entity substituted for the variable, if the rule had one.
    pub binding: Option<Entity>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GroundRuleSet {
    pub facts: Vec<Literal>,
    pub rules: Vec<GroundRule>,
}

/// Instantiates quantified rules over the theory's entities and resolves
/// out-of-vocabulary body literals through `oracle`.
pub fn ground(
    t: &DefeasibleTheory,
    oracle: &dyn KnowledgeOracle,
) -> Result<GroundRuleSet, SolverError> {
    let universe = t.universe();
    let mut rules = Vec::new();
    for rule in &t.rules {
        let bindings: Vec<Option<&Entity>> = match rule.quantifier {
            Quantifier::None => vec![None],
            Quantifier::Forall | Quantifier::Exists => universe.iter().map(Some).collect(),
        };
        for binding in bindings {
            let bind = |l: &Literal| match binding {
                Some(e) => l.bind(e),
                None => l.clone(),
            };
            let mut body = Vec::with_capacity(rule.body.len());
            for lit in &rule.body {
                let lit = bind(lit);
                if lit.is_foreign() {
                    let satisfied = foreign_satisfied(&lit, &t.facts, oracle)?;
                    body.push(GroundBody::Knowledge {
                        literal: lit,
                        satisfied,
                    });
                } else {
                    body.push(GroundBody::Literal(lit));
                }
            }
            rules.push(GroundRule {
                id: rule.id,
                template: rule.template,
                body,
                head: bind(&rule.head),
                binding: binding.cloned(),
            });
        }
    }
    Ok(GroundRuleSet {
        facts: t.facts.clone(),
        rules,
    })
}
