//! Background-knowledge links for out-of-vocabulary rule bodies.
//!
//! A [`KnowledgeLink`] pairs surface facts ("the dog is 13 months and a half
//! old") with a bridging rule body ("the dog is more than a year old") whose
//! connection needs world knowledge. Each category implements
//! [`KnowledgeCategory`]: it samples links with a chosen truth value and acts
//! as an exact oracle over the machine form stored in [`ForeignPredicate`].
//! Categories are registered by name in a [`KnowledgeRegistry`], which is
//! also the solver's [`KnowledgeOracle`].

mod categories;
mod tables;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::DetRng;
use crate::solver::{KnowledgeOracle, UnknownCategory};
use crate::theory::{Entity, ForeignPredicate, Literal, Predicate, Term};
use crate::vocab::Side;

pub use categories::{
    Affordance, Age, Colors, Events, Friends, Jobs, Money, Names, Places, TextualEntailment,
    Volume,
};
pub use tables::{KnowledgeTables, BUILTIN_KNOWLEDGE};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KnowledgeError {
    #[error("unsupported knowledge category {0:?}")]
    UnsupportedCategory(String),
    #[error("unknown time unit {0:?}")]
    UnknownUnit(String),
    #[error("dimensions must be positive")]
    NonpositiveDimension,
    #[error("no fresh entity left for a knowledge link")]
    PoolExhausted,
    #[error("knowledge table: {0}")]
    Table(String),
}

/// Surface facts plus the bridging body they settle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeLink {
    pub category: String,
    pub surface_facts: Vec<Literal>,
    /// Positive foreign literal used as a T5 rule body.
    pub bridging_body: Literal,
    pub holds: bool,
}

impl KnowledgeLink {
    /// Entities besides the subject that the link mentions.
    pub fn refs(&self) -> Vec<Entity> {
        let mut out: Vec<Entity> = self
            .surface_facts
            .iter()
            .chain([&self.bridging_body])
            .flat_map(|l| l.entities().cloned())
            .filter(|e| Some(e) != self.bridging_body.subject().as_entity())
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

/// Sampling context handed to a category.
pub struct SampleCtx<'a> {
    pub rng: &'a mut DetRng,
    /// Draws an entity unused elsewhere in the theory.
    pub fresh: &'a mut dyn FnMut() -> Option<Entity>,
}

pub trait KnowledgeCategory: Send + Sync {
    fn name(&self) -> &'static str;

    fn side(&self) -> Side;

    /// Builds a link about `subject` whose bridging body evaluates to `holds`.
    fn sample(
        &self,
        subject: &Entity,
        ctx: &mut SampleCtx<'_>,
        holds: bool,
    ) -> Result<KnowledgeLink, KnowledgeError>;

    /// Truth of `subject <body>` given the surface facts among `facts`;
    /// `None` when the facts say nothing relevant.
    fn evaluate(&self, subject: &Entity, body: &ForeignPredicate, facts: &[Literal]) -> Option<bool>;

    /// Substrings that only appear in text using this category.
    fn markers(&self) -> Vec<String>;

    /// A different fact of the same kind about the same subject.
    fn perturb_fact(&self, fact: &Literal, rng: &mut DetRng) -> Option<Literal>;
}

pub(crate) fn foreign(
    category: &str,
    relation: &str,
    args: Vec<String>,
    refs: Vec<Entity>,
    phrase: String,
) -> Predicate {
    Predicate::Foreign(ForeignPredicate {
        category: category.to_string(),
        relation: relation.to_string(),
        args,
        refs,
        phrase,
    })
}

pub(crate) fn foreign_fact(subject: &Entity, p: Predicate) -> Literal {
    Literal::new(Term::Entity(subject.clone()), p, None, false)
}

/// Positive facts of `category` about `subject`, as (relation, args).
pub(crate) fn facts_about<'f>(
    category: &'f str,
    subject: &'f Entity,
    facts: &'f [Literal],
) -> impl Iterator<Item = &'f ForeignPredicate> {
    facts.iter().filter_map(move |l| {
        let fp = l.predicate().as_foreign()?;
        (!l.negated && fp.category == category && l.subject().as_entity() == Some(subject))
            .then_some(fp)
    })
}

pub struct KnowledgeRegistry {
    categories: BTreeMap<&'static str, Box<dyn KnowledgeCategory>>,
}

impl KnowledgeRegistry {
    pub fn empty() -> Self {
        Self {
            categories: BTreeMap::new(),
        }
    }

    /// All eleven built-in categories over `tables`.
    pub fn with_tables(tables: &KnowledgeTables) -> Result<Self, KnowledgeError> {
        let mut r = Self::empty();
        r.register(Box::new(Age));
        r.register(Box::new(Friends::new(tables)?));
        r.register(Box::new(Places::new(tables)?));
        r.register(Box::new(Jobs::new(tables)?));
        r.register(Box::new(Volume));
        r.register(Box::new(TextualEntailment::new(tables)?));
        r.register(Box::new(Money));
        r.register(Box::new(Affordance::new(tables)?));
        r.register(Box::new(Colors::new(tables)?));
        r.register(Box::new(Names::new(tables)?));
        r.register(Box::new(Events::new(tables)?));
        Ok(r)
    }

    pub fn builtin() -> Self {
        Self::with_tables(&KnowledgeTables::builtin()).expect("bundled knowledge tables are complete")
    }

    pub fn register(&mut self, c: Box<dyn KnowledgeCategory>) {
        self.categories.insert(c.name(), c);
    }

    pub fn get(&self, name: &str) -> Option<&dyn KnowledgeCategory> {
        self.categories.get(name).map(|b| b.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.categories.keys().copied().collect()
    }

    /// Categories usable by `side`, in name order.
    pub fn for_side(&self, side: Side) -> Vec<&dyn KnowledgeCategory> {
        self.categories
            .values()
            .filter(|c| c.side() == side)
            .map(|b| b.as_ref())
            .collect()
    }
}

impl KnowledgeOracle for KnowledgeRegistry {
    fn evaluate(
        &self,
        subject: &Entity,
        predicate: &ForeignPredicate,
        facts: &[Literal],
    ) -> Result<Option<bool>, UnknownCategory> {
        let c = self
            .get(&predicate.category)
            .ok_or_else(|| UnknownCategory(predicate.category.clone()))?;
        Ok(c.evaluate(subject, predicate, facts))
    }
}

pub fn sample_knowledge_link(
    registry: &KnowledgeRegistry,
    category: &str,
    subject: &Entity,
    holds: bool,
    ctx: &mut SampleCtx<'_>,
) -> Result<KnowledgeLink, KnowledgeError> {
    registry
        .get(category)
        .ok_or_else(|| KnowledgeError::UnsupportedCategory(category.to_string()))?
        .sample(subject, ctx, holds)
}

/// Truth of the link's bridging body over its own surface facts.
pub fn evaluate_link(registry: &KnowledgeRegistry, link: &KnowledgeLink) -> Result<bool, KnowledgeError> {
    let c = registry
        .get(&link.category)
        .ok_or_else(|| KnowledgeError::UnsupportedCategory(link.category.clone()))?;
    let body = link
        .bridging_body
        .predicate()
        .as_foreign()
        .ok_or_else(|| KnowledgeError::UnsupportedCategory("in-vocabulary body".into()))?;
    let subject = link
        .bridging_body
        .subject()
        .as_entity()
        .ok_or_else(|| KnowledgeError::UnsupportedCategory("unbound subject".into()))?;
    Ok(c.evaluate(subject, body, &link.surface_facts) == Some(true))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeUnit {
    Day,
    Week,
    Month,
    Year,
}

impl TimeUnit {
    pub const ALL: [TimeUnit; 4] = [TimeUnit::Day, TimeUnit::Week, TimeUnit::Month, TimeUnit::Year];

    pub fn as_str(self) -> &'static str {
        match self {
            TimeUnit::Day => "day",
            TimeUnit::Week => "week",
            TimeUnit::Month => "month",
            TimeUnit::Year => "year",
        }
    }
}

impl std::str::FromStr for TimeUnit {
    type Err = KnowledgeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim_end_matches('s') {
            "day" => Ok(TimeUnit::Day),
            "week" => Ok(TimeUnit::Week),
            "month" => Ok(TimeUnit::Month),
            "year" => Ok(TimeUnit::Year),
            _ => Err(KnowledgeError::UnknownUnit(s.to_string())),
        }
    }
}

/// Day counts for the variable-length units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calendar {
    pub month_days: f64,
    pub year_days: f64,
}

impl Calendar {
    pub const FIXED: Calendar = Calendar {
        month_days: 30.0,
        year_days: 365.0,
    };

    pub fn days(&self, unit: TimeUnit) -> f64 {
        match unit {
            TimeUnit::Day => 1.0,
            TimeUnit::Week => 7.0,
            TimeUnit::Month => self.month_days,
            TimeUnit::Year => self.year_days,
        }
    }
}

/// Converts with week = 7, month = 30 and year = 365 days.
pub fn convert_time(value: f64, from: TimeUnit, to: TimeUnit) -> f64 {
    convert_time_with(Calendar::FIXED, value, from, to)
}

pub fn convert_time_with(cal: Calendar, value: f64, from: TimeUnit, to: TimeUnit) -> f64 {
    value * cal.days(from) / cal.days(to)
}

/// Smallest ratio between compared quantities produced by sampling.
pub const MARGIN: f64 = 1.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Solid {
    Sphere { radius: f64 },
    /// Thin flat object; thickness is ignored.
    Slab { height: f64, width: f64 },
}

pub fn fits_in_box(object: Solid, dims: [f64; 3]) -> Result<bool, KnowledgeError> {
    let object_dims: &[f64] = match &object {
        Solid::Sphere { radius } => std::slice::from_ref(radius),
        Solid::Slab { height, width } => &[*height, *width],
    };
    if dims.iter().chain(object_dims).any(|d| !d.is_finite() || *d <= 0.0) {
        return Err(KnowledgeError::NonpositiveDimension);
    }
    Ok(match object {
        Solid::Sphere { radius } => 2.0 * radius <= dims.iter().copied().fold(f64::INFINITY, f64::min),
        Solid::Slab { height, width } => (0..3).any(|i| {
            (0..3).any(|j| i != j && height <= dims[i] && width <= dims[j])
        }),
    })
}
