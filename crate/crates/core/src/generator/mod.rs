//! Backward generation of labelled examples.
//!
//! A proved example starts from a sampled question and expands it into
//! rules and sub-questions until the requested depth, optionally injecting
//! an opposing rule at each step. Disproved examples negate the question;
//! unknown ones perturb the theory until neither sign is derivable.

mod perturb;
mod shapes;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::knowledge::{sample_knowledge_link, KnowledgeError, KnowledgeRegistry, SampleCtx};
use crate::render::{render_problem, render_proof, RenderError, TemplateSet};
use crate::rng::DetRng;
use crate::solver::{check_defeasible_consistency, entail, ConflictKind, Proof, SolverError};
use crate::theory::{
    validate_theory, DefeasibleTheory, Entity, Label, Literal, Predicate, Preference, Question, Rule,
    RuleId, TemplateKind, Term,
};
use crate::vocab::{Side, Split, Vocab};

pub use perturb::{perturb_to_unknown, PERTURBATION_BUDGET};
pub use shapes::{Chain, Existential, Expansion, Join, RuleShape, ShapeCtx, ShapeRegistry, Universal1, Universal2};

/// Attempts per distractor before it is given up.
pub const DISTRACTOR_ATTEMPTS: usize = 10;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generation parameters: {0}")]
    InvalidParams(String),
    #[error("entity pool exhausted")]
    PoolExhausted,
    #[error("no unknown-label theory within {0} perturbations")]
    PerturbationBudgetExhausted(usize),
    #[error("theory is already unknown")]
    AlreadyUnknown,
    #[error("label round trip failed: wanted {expected}, solver gave {got}")]
    RoundTrip { expected: Label, got: Label },
    #[error("gold proof depth {got} differs from requested {expected}")]
    DepthMismatch { expected: usize, got: usize },
    #[error("generated theory has an unresolved conflict")]
    Inconsistent,
    #[error("generated theory is malformed: {0}")]
    Malformed(String),
    #[error(transparent)]
    Knowledge(KnowledgeError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Render(#[from] RenderError),
}

impl From<KnowledgeError> for GenError {
    fn from(e: KnowledgeError) -> Self {
        match e {
            KnowledgeError::PoolExhausted => GenError::PoolExhausted,
            other => GenError::Knowledge(other),
        }
    }
}

impl GenError {
    /// Whether a fresh seed may succeed where this attempt failed.
    pub fn is_retryable(&self) -> bool {
        !matches!(
            self,
            GenError::InvalidParams(_) | GenError::Render(_) | GenError::Knowledge(_)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub depth: usize,
    pub p_conf: f64,
    pub p_conf_type1: f64,
    pub p_miss_info: f64,
    pub distractors_per_step: usize,
    pub force_conflict_at_root: bool,
    pub vocab_split: Split,
    /// Structural rule shapes to draw from, uniformly.
    pub rule_types: Vec<TemplateKind>,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            depth: 1,
            p_conf: 0.5,
            p_conf_type1: 0.5,
            p_miss_info: 0.5,
            distractors_per_step: 1,
            force_conflict_at_root: false,
            vocab_split: Split::Train,
            rule_types: vec![
                TemplateKind::T1,
                TemplateKind::T2,
                TemplateKind::T3,
                TemplateKind::T4,
                TemplateKind::T6,
            ],
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<(), GenError> {
        for (name, p) in [
            ("p_conf", self.p_conf),
            ("p_conf_type1", self.p_conf_type1),
            ("p_miss_info", self.p_miss_info),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(GenError::InvalidParams(format!("{name}={p} is outside [0, 1]")));
            }
        }
        if self.rule_types.is_empty() {
            return Err(GenError::InvalidParams("rule_types is empty".into()));
        }
        if self.rule_types.contains(&TemplateKind::T5) {
            return Err(GenError::InvalidParams(
                "T5 rules come from knowledge links; control them with p_miss_info".into(),
            ));
        }
        Ok(())
    }
}

/// Everything generation reads besides parameters and seed.
pub struct Resources {
    pub vocab: Vocab,
    pub templates: TemplateSet,
    pub knowledge: KnowledgeRegistry,
    pub shapes: ShapeRegistry,
}

impl Resources {
    pub fn builtin() -> Self {
        Self {
            vocab: Vocab::builtin(),
            templates: TemplateSet::builtin(),
            knowledge: KnowledgeRegistry::builtin(),
            shapes: ShapeRegistry::builtin(),
        }
    }
}

/// Entities not yet used anywhere in the theory under construction.
#[derive(Debug, Clone)]
pub struct EntityPool {
    available: Vec<Entity>,
    consumed: BTreeSet<Entity>,
}

impl EntityPool {
    pub fn new(names: &[String], rng: &mut DetRng) -> Self {
        let mut available: Vec<Entity> = names.iter().filter_map(|n| Entity::new(n.as_str()).ok()).collect();
        rng.shuffle(&mut available);
        Self {
            available,
            consumed: BTreeSet::new(),
        }
    }

    pub fn take(&mut self) -> Result<Entity, GenError> {
        let e = self.available.pop().ok_or(GenError::PoolExhausted)?;
        self.consumed.insert(e.clone());
        Ok(e)
    }

    pub fn available(&self) -> usize {
        self.available.len()
    }

    pub fn is_consumed(&self, e: &Entity) -> bool {
        self.consumed.contains(e)
    }
}

pub fn sample_question(pool: &mut EntityPool, predicates: &[String], rng: &mut DetRng) -> Result<Question, GenError> {
    if pool.available() < 2 {
        return Err(GenError::PoolExhausted);
    }
    let s = pool.take()?;
    let o = pool.take()?;
    let p = rng.pick(predicates).clone();
    let negated = rng.chance(0.5);
    let l = Literal::new(Term::Entity(s), Predicate::Known(p), Some(o), negated);
    Question::new(l).map_err(|e| GenError::Malformed(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectedConflict {
    /// The rule the stated preference favours.
    pub preferred: RuleId,
    pub other: RuleId,
    pub kind: ConflictKind,
    /// The supporting side of the conflict lies on the chain proving the question.
    pub on_chain: bool,
}

/// What generation did, independent of what the solver later reports.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Skeleton {
    pub main_rules: Vec<RuleId>,
    pub conflicts: Vec<InjectedConflict>,
    /// Subjects of every expanded goal, one entry per step.
    pub points: Vec<Entity>,
}

impl Skeleton {
    pub fn steps(&self) -> usize {
        self.points.len()
    }

    pub fn count(&self, kind: ConflictKind) -> usize {
        self.conflicts.iter().filter(|c| c.kind == kind).count()
    }
}

#[derive(Debug, Clone)]
pub struct GeneratedTheory {
    pub theory: DefeasibleTheory,
    pub skeleton: Skeleton,
    /// Knowledge categories already attached to each subject.
    pub link_categories: BTreeMap<Entity, BTreeSet<String>>,
    next_id: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Main,
    Type1Loser,
    Type2Winner,
}

struct Builder<'a> {
    params: &'a GenParams,
    res: &'a Resources,
    side: Side,
    rng: &'a mut DetRng,
    pool: &'a mut EntityPool,
    out: GeneratedTheory,
}

impl Builder<'_> {
    fn new_id(&mut self) -> RuleId {
        self.out.next_id += 1;
        RuleId(self.out.next_id)
    }

    fn structural_kinds(&self) -> Vec<TemplateKind> {
        self.params
            .rule_types
            .iter()
            .copied()
            .filter(|k| self.res.shapes.get(*k).is_some())
            .collect()
    }

    fn link_category(&mut self, subject: &Entity) -> Option<&'static str> {
        let used = self.out.link_categories.get(subject);
        let options: Vec<&'static str> = self
            .res
            .knowledge
            .for_side(self.side)
            .iter()
            .map(|c| c.name())
            .filter(|n| used.is_none_or(|u| !u.contains(*n)))
            .collect();
        (!options.is_empty()).then(|| *self.rng.pick(&options))
    }

    /// Adds a rule concluding `head` and returns the sub-goals that fire it.
    fn add_rule(&mut self, head: &Literal, d: usize, role: Role) -> Result<(RuleId, Vec<Literal>), GenError> {
        let subject = head.subject().as_entity().cloned().expect("goals are ground");
        let wants_link = d == 1 && self.params.p_miss_info > 0.0 && self.rng.chance(self.params.p_miss_info);
        if wants_link {
            if let Some(category) = self.link_category(&subject) {
                let id = self.new_id();
                self.add_link_rule(id, head, &subject, category, role)?;
                return Ok((id, Vec::new()));
            }
        }
        let kinds = self.structural_kinds();
        let kind = *self.rng.pick(&kinds);
        let shape = self.res.shapes.get(kind).expect("filtered to registered shapes");
        let x = shape.expand(
            head,
            &mut ShapeCtx {
                rng: &mut *self.rng,
                pool: &mut *self.pool,
                predicates: self.res.vocab.predicates(self.side),
            },
        )?;
        let id = self.new_id();
        self.out
            .theory
            .rules
            .push(Rule::new(id, kind, x.body, shape.rule_head(head)));
        Ok((id, x.subgoals))
    }

    fn add_link_rule(
        &mut self,
        id: RuleId,
        head: &Literal,
        subject: &Entity,
        category: &'static str,
        role: Role,
    ) -> Result<(), GenError> {
        // A Type1 loser may or may not get its supporting facts.
        let (holds, emit) = match role {
            Role::Main => (true, true),
            Role::Type2Winner => (false, true),
            Role::Type1Loser => {
                let emit = self.rng.chance(0.5);
                (true, emit)
            }
        };
        let link = {
            let pool = &mut *self.pool;
            let mut fresh = || pool.take().ok();
            let mut ctx = SampleCtx {
                rng: &mut *self.rng,
                fresh: &mut fresh,
            };
            sample_knowledge_link(&self.res.knowledge, category, subject, holds, &mut ctx)?
        };
        if emit {
            self.out.theory.facts.extend(link.surface_facts.iter().cloned());
        }
        self.out
            .link_categories
            .entry(subject.clone())
            .or_default()
            .insert(category.to_string());
        self.out
            .theory
            .rules
            .push(Rule::new(id, TemplateKind::T5, vec![link.bridging_body], head.clone()));
        Ok(())
    }

    fn prove(&mut self, q: &Literal, d: usize, root: bool, on_chain: bool) -> Result<(), GenError> {
        if d == 0 {
            self.out.theory.facts.push(q.clone());
            return Ok(());
        }
        let subject = q.subject().as_entity().cloned().expect("goals are ground");
        self.out.skeleton.points.push(subject);
        let (r, subgoals) = self.add_rule(q, d, Role::Main)?;
        if on_chain {
            self.out.skeleton.main_rules.push(r);
        }
        for s in &subgoals {
            self.prove(s, d - 1, false, on_chain)?;
        }

        let coin = self.rng.chance(self.params.p_conf);
        if !(coin || (root && self.params.force_conflict_at_root)) {
            return Ok(());
        }
        let type1 = self.rng.chance(self.params.p_conf_type1);
        let opposite = q.negate();
        if type1 {
            let (r2, subs) = self.add_rule(&opposite, d, Role::Type1Loser)?;
            self.out.theory.preferences.push(Preference::new(r, r2));
            self.record(r, r2, ConflictKind::Type1, on_chain);
            for s in &subs {
                if self.rng.chance(0.5) {
                    self.prove(s, d - 1, false, false)?;
                }
            }
        } else {
            let (r2, subs) = self.add_rule(&opposite, d, Role::Type2Winner)?;
            self.out.theory.preferences.push(Preference::new(r2, r));
            self.record(r2, r, ConflictKind::Type2, on_chain);
            if !subs.is_empty() {
                let dropped = self.rng.below(subs.len());
                for (i, s) in subs.iter().enumerate() {
                    if i != dropped {
                        self.prove(s, d - 1, false, false)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn record(&mut self, preferred: RuleId, other: RuleId, kind: ConflictKind, on_chain: bool) {
        self.out.skeleton.conflicts.push(InjectedConflict {
            preferred,
            other,
            kind,
            on_chain,
        });
    }
}

/// Expands `q` into a theory that proves it at depth `params.depth`.
pub fn generate_theory(
    q: &Question,
    params: &GenParams,
    res: &Resources,
    pool: &mut EntityPool,
    rng: &mut DetRng,
) -> Result<GeneratedTheory, GenError> {
    params.validate()?;
    let mut b = Builder {
        params,
        res,
        side: params.vocab_split.side(),
        rng,
        pool,
        out: GeneratedTheory {
            theory: DefeasibleTheory::default(),
            skeleton: Skeleton::default(),
            link_categories: BTreeMap::new(),
            next_id: 0,
        },
    };
    b.prove(q.literal(), params.depth, true, true)?;
    let mut out = b.out;
    let mut seen = BTreeSet::new();
    out.theory.facts.retain(|f| seen.insert(f.clone()));
    Ok(out)
}

/// Steps and conflicts of a proof, independent of their order.
fn proof_key(p: Option<&Proof>) -> Option<(Vec<String>, Vec<String>)> {
    let p = p?;
    let mut steps: Vec<String> = p
        .steps
        .iter()
        .map(|s| serde_json::to_string(s).expect("steps serialize"))
        .collect();
    steps.sort();
    let mut conflicts: Vec<String> = p.conflicts.iter().map(|c| format!("{c:?}")).collect();
    conflicts.sort();
    Some((steps, conflicts))
}

/// Adds up to `distractors_per_step` facts or shallow rules at every step,
/// keeping each only if the label and gold proof are unchanged. Returns the
/// number kept.
pub fn add_distractors(
    gen: &mut GeneratedTheory,
    q: &Question,
    params: &GenParams,
    res: &Resources,
    pool: &mut EntityPool,
    rng: &mut DetRng,
) -> Result<usize, GenError> {
    let k = params.distractors_per_step;
    if k == 0 {
        return Ok(0);
    }
    let side = params.vocab_split.side();
    let base = entail(&gen.theory, q, &res.knowledge)?;
    let base_key = proof_key(base.proof.as_ref());
    let mut kept = 0;
    for subject in gen.skeleton.points.clone() {
        for _ in 0..k {
            for _ in 0..DISTRACTOR_ATTEMPTS {
                let facts = gen.theory.facts.len();
                let rules = gen.theory.rules.len();
                let links = gen.link_categories.clone();
                let added = distractor(gen, &subject, params, res, side, pool, rng);
                let ok = match added {
                    Ok(()) => match entail(&gen.theory, q, &res.knowledge) {
                        Ok(r) => r.label == base.label && proof_key(r.proof.as_ref()) == base_key,
                        Err(_) => false,
                    },
                    Err(GenError::PoolExhausted) if pool.available() == 0 => {
                        gen.theory.facts.truncate(facts);
                        gen.theory.rules.truncate(rules);
                        gen.link_categories = links;
                        return Ok(kept);
                    }
                    Err(_) => false,
                };
                if ok {
                    kept += 1;
                    break;
                }
                gen.theory.facts.truncate(facts);
                gen.theory.rules.truncate(rules);
                gen.link_categories = links;
            }
        }
    }
    Ok(kept)
}

fn distractor(
    gen: &mut GeneratedTheory,
    subject: &Entity,
    params: &GenParams,
    res: &Resources,
    side: Side,
    pool: &mut EntityPool,
    rng: &mut DetRng,
) -> Result<(), GenError> {
    let predicates = res.vocab.predicates(side);
    let roll = rng.unit();
    if roll < 0.2 && params.p_miss_info > 0.0 {
        let used = gen.link_categories.get(subject);
        let options: Vec<&'static str> = res
            .knowledge
            .for_side(side)
            .iter()
            .map(|c| c.name())
            .filter(|n| used.is_none_or(|u| !u.contains(*n)))
            .collect();
        if !options.is_empty() {
            let category = *rng.pick(&options);
            let holds = rng.chance(0.5);
            let link = {
                let mut fresh = || pool.take().ok();
                let mut ctx = SampleCtx {
                    rng: &mut *rng,
                    fresh: &mut fresh,
                };
                sample_knowledge_link(&res.knowledge, category, subject, holds, &mut ctx)?
            };
            gen.theory.facts.extend(link.surface_facts);
            gen.link_categories
                .entry(subject.clone())
                .or_default()
                .insert(category.to_string());
            return Ok(());
        }
    }
    let object = pool.take()?;
    let p = rng.pick(predicates).clone();
    let head = Literal::new(Term::Entity(subject.clone()), Predicate::Known(p), Some(object), rng.chance(0.5));
    if roll < 0.7 {
        if !gen.theory.facts.contains(&head.negate()) {
            gen.theory.facts.push(head);
        }
        return Ok(());
    }
    // One rule level, its body facts each present with probability one half.
    let kinds: Vec<TemplateKind> = params
        .rule_types
        .iter()
        .copied()
        .filter(|k| res.shapes.get(*k).is_some())
        .collect();
    let kind = *rng.pick(&kinds);
    let shape = res.shapes.get(kind).expect("registered");
    let x = shape.expand(
        &head,
        &mut ShapeCtx {
            rng: &mut *rng,
            pool: &mut *pool,
            predicates,
        },
    )?;
    gen.next_id += 1;
    let id = RuleId(gen.next_id);
    gen.theory.rules.push(Rule::new(id, kind, x.body, shape.rule_head(&head)));
    for s in x.subgoals {
        if rng.chance(0.5) && !gen.theory.facts.contains(&s.negate()) && !gen.theory.facts.contains(&s) {
            gen.theory.facts.push(s);
        }
    }
    Ok(())
}

/// Shuffles facts, rules and preferences and renumbers rules `Rule1..`
/// in their new order so ids carry no generation order.
fn shuffle_and_renumber(gen: &mut GeneratedTheory, rng: &mut DetRng) {
    let t = &mut gen.theory;
    rng.shuffle(&mut t.facts);
    rng.shuffle(&mut t.rules);
    rng.shuffle(&mut t.preferences);
    let map: HashMap<RuleId, RuleId> = t
        .rules
        .iter()
        .enumerate()
        .map(|(i, r)| (r.id, RuleId(i as u32 + 1)))
        .collect();
    for r in &mut t.rules {
        r.id = map[&r.id];
    }
    for p in &mut t.preferences {
        *p = Preference::new(map[&p.winner], map[&p.loser]);
    }
    let s = &mut gen.skeleton;
    for r in &mut s.main_rules {
        *r = map[r];
    }
    for c in &mut s.conflicts {
        c.preferred = map[&c.preferred];
        c.other = map[&c.other];
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub depth: usize,
    pub p_conf: f64,
    pub p_conf_type1: f64,
    pub p_miss_info: f64,
    /// Distractors actually inserted.
    pub distractors: usize,
    pub seed: u64,
    pub knowledge_categories: Vec<String>,
    pub steps: usize,
    pub conflicts_type1: usize,
    pub conflicts_type2: usize,
    pub vocab_split: Split,
    pub perturbations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub id: String,
    pub text: String,
    pub question: Question,
    pub label: Label,
    pub proof_text: String,
    pub theory: DefeasibleTheory,
    /// Rendered sentence of each rule, in theory order.
    pub rule_texts: Vec<String>,
    pub proof: Option<Proof>,
    pub metadata: Metadata,
}

fn categories_in(t: &DefeasibleTheory) -> Vec<String> {
    let cats: BTreeSet<String> = t
        .facts
        .iter()
        .chain(t.rules.iter().flat_map(|r| r.body.iter()))
        .filter_map(|l| l.predicate().as_foreign().map(|f| f.category.clone()))
        .collect();
    cats.into_iter().collect()
}

/// One generation attempt for `target`. Callers retry failures with a
/// derived seed.
pub fn generate_example(params: &GenParams, target: Label, seed: u64, res: &Resources) -> Result<Example, GenError> {
    params.validate()?;
    let side = params.vocab_split.side();
    let mut rng = DetRng::new(seed);
    let mut pool = EntityPool::new(res.vocab.entities(side), &mut rng);
    let q = sample_question(&mut pool, res.vocab.predicates(side), &mut rng)?;
    let mut gen = generate_theory(&q, params, res, &mut pool, &mut rng)?;
    let inserted = add_distractors(&mut gen, &q, params, res, &mut pool, &mut rng)?;
    shuffle_and_renumber(&mut gen, &mut rng);

    let report = validate_theory(&gen.theory);
    if let Some(v) = report.violations.first() {
        return Err(GenError::Malformed(v.to_string()));
    }
    let base = entail(&gen.theory, &q, &res.knowledge)?;
    if base.label != Label::Proved {
        return Err(GenError::RoundTrip {
            expected: Label::Proved,
            got: base.label,
        });
    }
    if !check_defeasible_consistency(&gen.theory, &res.knowledge)?.is_consistent() {
        return Err(GenError::Inconsistent);
    }

    let (theory, question, perturbations) = match target {
        Label::Proved => (gen.theory, q, Vec::new()),
        Label::Disproved => (gen.theory, q.negate(), Vec::new()),
        Label::Unknown => {
            let (t, trace) = perturb_to_unknown(
                &gen.theory,
                &q,
                res.vocab.predicates(side),
                &res.knowledge,
                &mut rng,
            )?;
            (t, q, trace)
        }
    };
    let result = entail(&theory, &question, &res.knowledge)?;
    if result.label != target {
        return Err(GenError::RoundTrip {
            expected: target,
            got: result.label,
        });
    }
    if let Some(p) = &result.proof {
        if p.depth() != params.depth {
            return Err(GenError::DepthMismatch {
                expected: params.depth,
                got: p.depth(),
            });
        }
    }

    let rendered = render_problem(&theory, &question, &res.templates, side, seed)?;
    let proof = result.proof.unwrap_or_default();
    let proof_text = render_proof(&proof, &theory, &question, result.label, &result.derived)?;
    let metadata = Metadata {
        depth: params.depth,
        p_conf: params.p_conf,
        p_conf_type1: params.p_conf_type1,
        p_miss_info: params.p_miss_info,
        distractors: inserted,
        seed,
        knowledge_categories: categories_in(&theory),
        steps: gen.skeleton.steps(),
        conflicts_type1: gen.skeleton.count(ConflictKind::Type1),
        conflicts_type2: gen.skeleton.count(ConflictKind::Type2),
        vocab_split: params.vocab_split,
        perturbations,
    };
    Ok(Example {
        id: format!("{seed:016x}"),
        text: rendered.text,
        question,
        label: result.label,
        proof_text,
        theory,
        rule_texts: rendered.rule_texts,
        proof: (result.label != Label::Unknown).then_some(proof),
        metadata,
    })
}

#[cfg(test)]
mod tests;
