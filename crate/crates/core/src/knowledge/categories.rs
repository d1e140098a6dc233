use std::collections::{BTreeMap, BTreeSet};

use super::{
    facts_about, fits_in_box, foreign, foreign_fact, Calendar, KnowledgeCategory, KnowledgeError,
    KnowledgeLink, KnowledgeTables, SampleCtx, Solid, TimeUnit, MARGIN,
};
use crate::render::grammar::{article, noun_phrase, number_word};
use crate::rng::DetRng;
use crate::theory::{Entity, ForeignPredicate, Literal};
use crate::vocab::Side;

fn body(subject: &Entity, category: &str, relation: &str, args: Vec<String>, refs: Vec<Entity>, phrase: String) -> Literal {
    foreign_fact(subject, foreign(category, relation, args, refs, phrase))
}

fn subject_of(fact: &Literal) -> Option<&Entity> {
    fact.subject().as_entity()
}

fn fresh(ctx: &mut SampleCtx<'_>) -> Result<Entity, KnowledgeError> {
    (ctx.fresh)().ok_or(KnowledgeError::PoolExhausted)
}

/// Uniform pick among the items satisfying `ok`.
fn pick_where<'a, T>(rng: &mut DetRng, items: &'a [T], ok: impl Fn(&T) -> bool) -> Option<&'a T> {
    let pool: Vec<&T> = items.iter().filter(|x| ok(x)).collect();
    if pool.is_empty() {
        None
    } else {
        Some(pool[rng.below(pool.len())])
    }
}

fn fmt_num(x: f64) -> String {
    if x.fract() == 0.0 {
        format!("{}", x as i64)
    } else {
        format!("{x:.1}")
    }
}

// ---------------------------------------------------------------- age

pub struct Age;

/// "a year", "13 months and a half", "half a week".
fn age_amount(value: f64, unit: TimeUnit) -> String {
    let whole = value.trunc() as u64;
    let half = value.fract() != 0.0;
    let u = unit.as_str();
    match (whole, half) {
        (0, _) => format!("half a {u}"),
        (1, false) => format!("{} {u}", article(u)),
        (1, true) => format!("one {u} and a half"),
        (n, false) => format!("{n} {u}s"),
        (n, true) => format!("{n} {u}s and a half"),
    }
}

fn age_days(args: &[String], cal: Calendar) -> Option<f64> {
    let value: f64 = args.first()?.parse().ok()?;
    let unit: TimeUnit = args.get(1)?.parse().ok()?;
    Some(value * cal.days(unit))
}

impl Age {
    fn random_age(rng: &mut DetRng) -> (f64, TimeUnit) {
        let unit = *rng.pick(&TimeUnit::ALL);
        let value = match unit {
            TimeUnit::Day => rng.range(2, 120) as f64,
            TimeUnit::Week => rng.range(1, 60) as f64,
            TimeUnit::Month => rng.range(2, 72) as f64 / 2.0,
            TimeUnit::Year => rng.range(2, 24) as f64 / 2.0,
        };
        (value, unit)
    }

    fn fact(subject: &Entity, value: f64, unit: TimeUnit) -> Literal {
        body(
            subject,
            "age",
            "age",
            vec![fmt_num(value), unit.as_str().into()],
            vec![],
            format!("is {} old", age_amount(value, unit)),
        )
    }

    /// Truth of `age <relation> threshold` under `cal`.
    pub fn compare(cal: Calendar, age: &[String], relation: &str, threshold: &[String]) -> Option<bool> {
        let x = age_days(age, cal)?;
        let y = age_days(threshold, cal)?;
        match relation {
            "older_than" => Some(x > y),
            "younger_than" => Some(x < y),
            _ => None,
        }
    }
}

impl KnowledgeCategory for Age {
    fn name(&self) -> &'static str {
        "age"
    }

    fn side(&self) -> Side {
        Side::Train
    }

    fn sample(&self, subject: &Entity, ctx: &mut SampleCtx<'_>, holds: bool) -> Result<KnowledgeLink, KnowledgeError> {
        let rng = &mut *ctx.rng;
        loop {
            let (value, unit) = Self::random_age(rng);
            let x = value * Calendar::FIXED.days(unit);
            let older = rng.chance(0.5);
            // the threshold must sit below x when "older" is meant to hold
            let below = older == holds;
            let mut units = TimeUnit::ALL;
            rng.shuffle(&mut units);
            for tu in units {
                let max = match tu {
                    TimeUnit::Day => 400,
                    TimeUnit::Week => 100,
                    TimeUnit::Month => 60,
                    TimeUnit::Year => 15,
                };
                let candidates: Vec<u64> = (1..=max)
                    .filter(|&n| {
                        let y = n as f64 * Calendar::FIXED.days(tu);
                        if below {
                            x >= MARGIN * y
                        } else {
                            y >= MARGIN * x
                        }
                    })
                    .collect();
                if candidates.is_empty() {
                    continue;
                }
                let y = *rng.pick(&candidates) as f64;
                let relation = if older { "older_than" } else { "younger_than" };
                let cmp = if older { "more" } else { "less" };
                return Ok(KnowledgeLink {
                    category: "age".into(),
                    surface_facts: vec![Self::fact(subject, value, unit)],
                    bridging_body: body(
                        subject,
                        "age",
                        relation,
                        vec![fmt_num(y), tu.as_str().into()],
                        vec![],
                        format!("is {cmp} than {} old", age_amount(y, tu)),
                    ),
                    holds,
                });
            }
        }
    }

    fn evaluate(&self, subject: &Entity, b: &ForeignPredicate, facts: &[Literal]) -> Option<bool> {
        let fact = facts_about("age", subject, facts).find(|f| f.relation == "age")?;
        Self::compare(Calendar::FIXED, &fact.args, &b.relation, &b.args)
    }

    fn markers(&self) -> Vec<String> {
        vec![" old".into()]
    }

    fn perturb_fact(&self, fact: &Literal, rng: &mut DetRng) -> Option<Literal> {
        let (value, unit) = Self::random_age(rng);
        Some(Self::fact(subject_of(fact)?, value, unit))
    }
}

// ---------------------------------------------------------------- friends

pub struct Friends {
    adjectives: Vec<String>,
}

impl Friends {
    pub fn new(t: &KnowledgeTables) -> Result<Self, KnowledgeError> {
        let adjectives: Vec<String> = t.pairs("adjectives")?.into_iter().map(|(_, v)| v).collect();
        Ok(Self { adjectives })
    }

    fn fact(&self, subject: &Entity, rng: &mut DetRng) -> (Literal, u64) {
        let x = rng.range(1, 12);
        let (args, phrase) = if x >= 2 && rng.chance(0.5) {
            let x1 = rng.range(1, x - 1);
            let x2 = x - x1;
            let adj = rng.pick(&self.adjectives).clone();
            let first = if x1 == 1 {
                format!("one friend that is {adj}")
            } else {
                format!("{} friends that are {adj}", number_word(x1 as u32))
            };
            let rest = if x2 == 1 { "one that is not".to_string() } else { format!("{} that are not", number_word(x2 as u32)) };
            let phrase = format!("has {first} and {rest}");
            (vec![x1.to_string(), x2.to_string(), adj], phrase)
        } else {
            let noun = if x == 1 { "friend" } else { "friends" };
            (vec![x.to_string()], format!("has {} {noun}", number_word(x as u32)))
        };
        (body(subject, "friends", "friends", args, vec![], phrase), x)
    }
}

impl KnowledgeCategory for Friends {
    fn name(&self) -> &'static str {
        "friends"
    }

    fn side(&self) -> Side {
        Side::Train
    }

    fn sample(&self, subject: &Entity, ctx: &mut SampleCtx<'_>, holds: bool) -> Result<KnowledgeLink, KnowledgeError> {
        let (fact, x) = self.fact(subject, ctx.rng);
        let rng = &mut *ctx.rng;
        let more = if x == 1 && holds { false } else { rng.chance(0.5) };
        let y = match (more, holds) {
            (true, true) => rng.range(1, x - 1),
            (true, false) => rng.range(x, x + 6),
            (false, true) => rng.range(x + 1, x + 8),
            (false, false) => rng.range(1, x),
        };
        let (relation, cmp) = if more {
            ("more_friends", "more")
        } else {
            ("fewer_friends", "less")
        };
        let noun = if y == 1 { "friend" } else { "friends" };
        Ok(KnowledgeLink {
            category: "friends".into(),
            surface_facts: vec![fact],
            bridging_body: body(
                subject,
                "friends",
                relation,
                vec![y.to_string()],
                vec![],
                format!("has {cmp} than {y} {noun}"),
            ),
            holds,
        })
    }

    fn evaluate(&self, subject: &Entity, b: &ForeignPredicate, facts: &[Literal]) -> Option<bool> {
        let fact = facts_about("friends", subject, facts).find(|f| f.relation == "friends")?;
        let total: u64 = fact
            .args
            .iter()
            .take(2)
            .map(|a| a.parse::<u64>().ok())
            .sum::<Option<u64>>()?;
        let y: u64 = b.args.first()?.parse().ok()?;
        match b.relation.as_str() {
            "more_friends" => Some(total > y),
            "fewer_friends" => Some(total < y),
            _ => None,
        }
    }

    fn markers(&self) -> Vec<String> {
        vec!["friend".into()]
    }

    fn perturb_fact(&self, fact: &Literal, rng: &mut DetRng) -> Option<Literal> {
        Some(self.fact(subject_of(fact)?, rng).0)
    }
}

// ------------------------------------------------ table-backed categories

/// A category whose facts carry a key and whose bodies carry a value, with
/// truth given by a curated key -> values relation.
struct Lookup {
    name: &'static str,
    side: Side,
    fact_relation: &'static str,
    body_relation: &'static str,
    relation: BTreeMap<String, BTreeSet<String>>,
    keys: Vec<String>,
    values: Vec<String>,
    fact_phrase: fn(&str) -> String,
    body_phrase: fn(&str) -> String,
}

impl Lookup {
    fn new(
        t: &KnowledgeTables,
        table: &str,
        name: &'static str,
        side: Side,
        relations: (&'static str, &'static str),
        fact_phrase: fn(&str) -> String,
        body_phrase: fn(&str) -> String,
    ) -> Result<Self, KnowledgeError> {
        let mut relation: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (k, v) in t.pairs(table)? {
            relation.entry(k).or_default().insert(v);
        }
        let keys: Vec<String> = relation.keys().cloned().collect();
        let values: Vec<String> = relation
            .values()
            .flatten()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if values.len() < 2 {
            return Err(KnowledgeError::Table(format!("{table} needs at least two distinct values")));
        }
        Ok(Self {
            name,
            side,
            fact_relation: relations.0,
            body_relation: relations.1,
            relation,
            keys,
            values,
            fact_phrase,
            body_phrase,
        })
    }

    fn fact(&self, subject: &Entity, key: &str) -> Literal {
        body(subject, self.name, self.fact_relation, vec![key.into()], vec![], (self.fact_phrase)(key))
    }

    fn sample(&self, subject: &Entity, rng: &mut DetRng, holds: bool) -> KnowledgeLink {
        loop {
            let key = rng.pick(&self.keys);
            let related = &self.relation[key];
            let value = pick_where(rng, &self.values, |v| related.contains(v) == holds);
            if let Some(value) = value {
                return KnowledgeLink {
                    category: self.name.into(),
                    surface_facts: vec![self.fact(subject, key)],
                    bridging_body: body(
                        subject,
                        self.name,
                        self.body_relation,
                        vec![value.clone()],
                        vec![],
                        (self.body_phrase)(value),
                    ),
                    holds,
                };
            }
        }
    }

    fn evaluate(&self, subject: &Entity, b: &ForeignPredicate, facts: &[Literal]) -> Option<bool> {
        if b.relation != self.body_relation {
            return None;
        }
        let value = b.args.first()?;
        let mut seen = false;
        for f in facts_about(self.name, subject, facts).filter(|f| f.relation == self.fact_relation) {
            seen = true;
            let key = f.args.first()?;
            if self.relation.get(key).is_some_and(|vs| vs.contains(value)) {
                return Some(true);
            }
        }
        seen.then_some(false)
    }

    fn markers(&self) -> Vec<String> {
        let mut out: Vec<String> = self.keys.iter().map(|k| (self.fact_phrase)(k)).collect();
        out.extend(self.values.iter().map(|v| (self.body_phrase)(v)));
        out
    }

    fn perturb_fact(&self, fact: &Literal, rng: &mut DetRng) -> Option<Literal> {
        let current = fact.predicate().as_foreign()?.args.first()?;
        let key = pick_where(rng, &self.keys, |k| k != current)?;
        Some(self.fact(subject_of(fact)?, key))
    }
}

macro_rules! lookup_category {
    ($ty:ident) => {
        impl KnowledgeCategory for $ty {
            fn name(&self) -> &'static str {
                self.0.name
            }
            fn side(&self) -> Side {
                self.0.side
            }
            fn sample(&self, subject: &Entity, ctx: &mut SampleCtx<'_>, holds: bool) -> Result<KnowledgeLink, KnowledgeError> {
                Ok(self.0.sample(subject, ctx.rng, holds))
            }
            fn evaluate(&self, subject: &Entity, b: &ForeignPredicate, facts: &[Literal]) -> Option<bool> {
                self.0.evaluate(subject, b, facts)
            }
            fn markers(&self) -> Vec<String> {
                self.0.markers()
            }
            fn perturb_fact(&self, fact: &Literal, rng: &mut DetRng) -> Option<Literal> {
                self.0.perturb_fact(fact, rng)
            }
        }
    };
}

/// City in the fact, country in the rule.
pub struct Places(Lookup);

impl Places {
    pub fn new(t: &KnowledgeTables) -> Result<Self, KnowledgeError> {
        Lookup::new(
            t,
            "places",
            "places",
            Side::Train,
            ("city", "country"),
            |c| format!("is currently in {c}"),
            |c| format!("is currently in {c}"),
        )
        .map(Self)
    }
}
lookup_category!(Places);

/// Job in the fact, industry in the rule.
pub struct Jobs(Lookup);

impl Jobs {
    pub fn new(t: &KnowledgeTables) -> Result<Self, KnowledgeError> {
        Lookup::new(
            t,
            "jobs",
            "jobs",
            Side::Train,
            ("job", "industry"),
            |j| format!("is {} {j}", article(j)),
            |i| format!("works in {i}"),
        )
        .map(Self)
    }
}
lookup_category!(Jobs);

/// Premise in the fact, entailed hypothesis in the rule.
pub struct TextualEntailment(Lookup);

impl TextualEntailment {
    pub fn new(t: &KnowledgeTables) -> Result<Self, KnowledgeError> {
        Lookup::new(
            t,
            "textual_entailment",
            "textual_entailment",
            Side::Train,
            ("premise", "hypothesis"),
            |p| p.to_string(),
            |h| h.to_string(),
        )
        .map(Self)
    }
}
lookup_category!(TextualEntailment);

/// Item in the fact, one of its properties in the rule.
pub struct Affordance(Lookup);

impl Affordance {
    pub fn new(t: &KnowledgeTables) -> Result<Self, KnowledgeError> {
        Lookup::new(
            t,
            "affordance",
            "affordance",
            Side::Test,
            ("item", "property"),
            |i| format!("has {i}"),
            |p| format!("has {p}"),
        )
        .map(Self)
    }
}
lookup_category!(Affordance);

/// Card color in the fact, a color group in the rule.
pub struct Colors(Lookup);

impl Colors {
    pub fn new(t: &KnowledgeTables) -> Result<Self, KnowledgeError> {
        // rows are group -> color; facts need color -> groups
        let mut inverted = String::new();
        for r in t.rows("colors").iter().filter(|r| r.key != "color") {
            inverted.push_str(&format!("colors\t{}\t{}\n", r.value, r.key));
        }
        for r in t.rows("colors").iter().filter(|r| r.key == "color") {
            if !inverted.contains(&format!("\t{}\t", r.value)) {
                // a color outside every group still needs a fact row
                inverted.push_str(&format!("colors\t{}\tnone\n", r.value));
            }
        }
        let inverted = KnowledgeTables::parse(&inverted)?;
        let mut l = Lookup::new(
            &inverted,
            "colors",
            "colors",
            Side::Test,
            ("card", "card_group"),
            |c| format!("has a card that is {c} in color"),
            |g| format!("has a card whose color {g}"),
        )?;
        l.values.retain(|v| v != "none");
        Ok(Self(l))
    }
}
lookup_category!(Colors);

// ---------------------------------------------------------------- volume

pub struct Volume;

impl Volume {
    fn object(rng: &mut DetRng) -> (Solid, Vec<String>, String, &'static str) {
        match rng.below(3) {
            0 => {
                let r = rng.range(4, 30) as f64;
                (
                    Solid::Sphere { radius: r },
                    vec!["ball".into(), fmt_num(r)],
                    format!("has a ball with a radius of {} inches", fmt_num(r)),
                    "ball",
                )
            }
            1 => {
                let d = rng.range(8, 60) as f64;
                (
                    Solid::Sphere { radius: d / 2.0 },
                    vec!["ball".into(), fmt_num(d / 2.0)],
                    format!("has a basketball with a diameter of {} inches", fmt_num(d)),
                    "basketball",
                )
            }
            _ => {
                let h = rng.range(8, 40) as f64;
                let w = rng.range(8, 40) as f64;
                (
                    Solid::Slab { height: h, width: w },
                    vec!["notebook".into(), fmt_num(h), fmt_num(w)],
                    format!(
                        "has a notebook which is {} inches high and {} inches wide",
                        fmt_num(h),
                        fmt_num(w)
                    ),
                    "notebook",
                )
            }
        }
    }

    fn solid(args: &[String]) -> Option<Solid> {
        let num = |i: usize| args.get(i)?.parse::<f64>().ok();
        match args.first()?.as_str() {
            "ball" => Some(Solid::Sphere { radius: num(1)? }),
            "notebook" => Some(Solid::Slab {
                height: num(1)?,
                width: num(2)?,
            }),
            _ => None,
        }
    }
}

impl KnowledgeCategory for Volume {
    fn name(&self) -> &'static str {
        "volume"
    }

    fn side(&self) -> Side {
        Side::Train
    }

    fn sample(&self, subject: &Entity, ctx: &mut SampleCtx<'_>, holds: bool) -> Result<KnowledgeLink, KnowledgeError> {
        let rng = &mut *ctx.rng;
        loop {
            let (solid, args, phrase, noun) = Self::object(rng);
            for _ in 0..200 {
                let dims = [0, 1, 2].map(|_| rng.range(60, 700) as f64 / 10.0);
                if fits_in_box(solid, dims)? != holds {
                    continue;
                }
                let kind = args[0].clone();
                let shown: Vec<String> = dims.iter().map(|d| fmt_num(*d)).collect();
                let fact = body(subject, "volume", "has_object", args, vec![], phrase);
                let mut bargs = vec![kind];
                bargs.extend(shown.iter().cloned());
                let bphrase = format!("has {} {noun} that fits in a {} inches box", article(noun), shown.join(" x "));
                return Ok(KnowledgeLink {
                    category: "volume".into(),
                    surface_facts: vec![fact],
                    bridging_body: body(subject, "volume", "fits_box", bargs, vec![], bphrase),
                    holds,
                });
            }
        }
    }

    fn evaluate(&self, subject: &Entity, b: &ForeignPredicate, facts: &[Literal]) -> Option<bool> {
        if b.relation != "fits_box" {
            return None;
        }
        let kind = b.args.first()?;
        let fact = facts_about("volume", subject, facts)
            .find(|f| f.relation == "has_object" && f.args.first() == Some(kind))?;
        let solid = Self::solid(&fact.args)?;
        let dims: Vec<f64> = b.args[1..].iter().map(|a| a.parse().ok()).collect::<Option<_>>()?;
        fits_in_box(solid, dims.try_into().ok()?).ok()
    }

    fn markers(&self) -> Vec<String> {
        vec!["inches".into()]
    }

    fn perturb_fact(&self, fact: &Literal, rng: &mut DetRng) -> Option<Literal> {
        let kind = fact.predicate().as_foreign()?.args.first()?.clone();
        loop {
            let (_, args, phrase, _) = Self::object(rng);
            if args[0] == kind {
                return Some(body(subject_of(fact)?, "volume", "has_object", args, vec![], phrase));
            }
        }
    }
}

// ---------------------------------------------------------------- money

pub struct Money;

impl Money {
    fn fact(subject: &Entity, amount: u64) -> Literal {
        body(
            subject,
            "money",
            "money",
            vec![amount.to_string()],
            vec![],
            format!("has {amount} dollars"),
        )
    }

    fn amount(subject: &Entity, facts: &[Literal]) -> Option<u64> {
        facts_about("money", subject, facts)
            .find(|f| f.relation == "money")?
            .args
            .first()?
            .parse()
            .ok()
    }
}

impl KnowledgeCategory for Money {
    fn name(&self) -> &'static str {
        "money"
    }

    fn side(&self) -> Side {
        Side::Test
    }

    fn sample(&self, subject: &Entity, ctx: &mut SampleCtx<'_>, holds: bool) -> Result<KnowledgeLink, KnowledgeError> {
        let others = if ctx.rng.chance(0.5) { 2 } else { 1 };
        let refs: Vec<Entity> = (0..others).map(|_| fresh(ctx)).collect::<Result<_, _>>()?;
        let rng = &mut *ctx.rng;
        let more = rng.chance(0.5);
        let below = more == holds;
        let (x, total) = loop {
            let x = rng.range(10, 100);
            let total = rng.range(others as u64, 100);
            let ok = if below {
                x as f64 >= MARGIN * total as f64
            } else {
                total as f64 >= MARGIN * x as f64
            };
            if ok {
                break (x, total);
            }
        };
        let shares: Vec<u64> = if others == 1 {
            vec![total]
        } else {
            let a = rng.range(1, total - 1);
            vec![a, total - a]
        };
        let mut surface = vec![Self::fact(subject, x)];
        surface.extend(refs.iter().zip(&shares).map(|(e, s)| Self::fact(e, *s)));
        let names: Vec<String> = refs.iter().map(noun_phrase).collect();
        let cmp = if more { "more" } else { "less" };
        let phrase = if others == 1 {
            format!("has {cmp} money than {}", names[0])
        } else {
            format!("has {cmp} money than {} and {} combined", names[0], names[1])
        };
        let relation = if more { "more_money" } else { "less_money" };
        Ok(KnowledgeLink {
            category: "money".into(),
            surface_facts: surface,
            bridging_body: body(subject, "money", relation, vec![], refs, phrase),
            holds,
        })
    }

    fn evaluate(&self, subject: &Entity, b: &ForeignPredicate, facts: &[Literal]) -> Option<bool> {
        let x = Self::amount(subject, facts)?;
        let total: u64 = b.refs.iter().map(|e| Self::amount(e, facts)).sum::<Option<u64>>()?;
        match b.relation.as_str() {
            "more_money" => Some(x > total),
            "less_money" => Some(x < total),
            _ => None,
        }
    }

    fn markers(&self) -> Vec<String> {
        vec![" dollars".into(), "money than".into()]
    }

    fn perturb_fact(&self, fact: &Literal, rng: &mut DetRng) -> Option<Literal> {
        let current: u64 = fact.predicate().as_foreign()?.args.first()?.parse().ok()?;
        let next = loop {
            let n = rng.range(1, 100);
            if n != current {
                break n;
            }
        };
        Some(Self::fact(subject_of(fact)?, next))
    }
}

// ---------------------------------------------------------------- names

pub struct Names {
    names: Vec<String>,
}

impl Names {
    pub fn new(t: &KnowledgeTables) -> Result<Self, KnowledgeError> {
        let names: Vec<String> = t.pairs("names")?.into_iter().map(|(_, v)| v).collect();
        let initials: BTreeSet<char> = names.iter().filter_map(|n| initial(n)).collect();
        if initials.len() < 2 || initials.len() == names.len() {
            return Err(KnowledgeError::Table(
                "names need both shared and distinct first letters".into(),
            ));
        }
        Ok(Self { names })
    }

    fn fact(subject: &Entity, name: &str) -> Literal {
        body(subject, "names", "name", vec![name.into()], vec![], format!("is named {name}"))
    }

    fn name_of<'f>(subject: &Entity, facts: &'f [Literal]) -> Option<&'f str> {
        let fact = facts
            .iter()
            .filter(|l| !l.negated && l.subject().as_entity() == Some(subject))
            .filter_map(|l| l.predicate().as_foreign())
            .find(|f| f.category == "names" && f.relation == "name")?;
        fact.args.first().map(String::as_str)
    }
}

fn initial(name: &str) -> Option<char> {
    name.chars().next().map(|c| c.to_ascii_lowercase())
}

impl KnowledgeCategory for Names {
    fn name(&self) -> &'static str {
        "names"
    }

    fn side(&self) -> Side {
        Side::Test
    }

    fn sample(&self, subject: &Entity, ctx: &mut SampleCtx<'_>, holds: bool) -> Result<KnowledgeLink, KnowledgeError> {
        let other = fresh(ctx)?;
        let rng = &mut *ctx.rng;
        let (a, b) = loop {
            let a = rng.pick(&self.names);
            let b = pick_where(rng, &self.names, |n| n != a && (initial(n) == initial(a)) == holds);
            if let Some(b) = b {
                break (a.clone(), b.clone());
            }
        };
        let phrase = format!(
            "has a name whose first letter is the same as the first letter of {}'s name",
            noun_phrase(&other)
        );
        Ok(KnowledgeLink {
            category: "names".into(),
            surface_facts: vec![Self::fact(subject, &a), Self::fact(&other, &b)],
            bridging_body: body(subject, "names", "same_initial", vec![], vec![other], phrase),
            holds,
        })
    }

    fn evaluate(&self, subject: &Entity, b: &ForeignPredicate, facts: &[Literal]) -> Option<bool> {
        if b.relation != "same_initial" {
            return None;
        }
        let mine = initial(Self::name_of(subject, facts)?)?;
        let theirs = initial(Self::name_of(b.refs.first()?, facts)?)?;
        Some(mine == theirs)
    }

    fn markers(&self) -> Vec<String> {
        vec!["is named".into(), "first letter".into()]
    }

    fn perturb_fact(&self, fact: &Literal, rng: &mut DetRng) -> Option<Literal> {
        let current = fact.predicate().as_foreign()?.args.first()?;
        let name = pick_where(rng, &self.names, |n| initial(n) != initial(current))?;
        Some(Self::fact(subject_of(fact)?, name))
    }
}

// ---------------------------------------------------------------- events

pub struct Events {
    events: Vec<(String, i32)>,
}

impl Events {
    pub const YEARS: (i32, i32) = (1900, 2023);

    pub fn new(t: &KnowledgeTables) -> Result<Self, KnowledgeError> {
        let events = t
            .pairs("events")?
            .into_iter()
            .map(|(k, v)| {
                v.parse::<i32>()
                    .map(|y| (k.clone(), y))
                    .map_err(|_| KnowledgeError::Table(format!("event {k:?} has a bad year {v:?}")))
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { events })
    }

    fn fact(subject: &Entity, year: i32) -> Literal {
        body(
            subject,
            "events",
            "movie_year",
            vec![year.to_string()],
            vec![],
            format!("is watching a movie that was released in {year}"),
        )
    }

    fn year_of(&self, event: &str) -> Option<i32> {
        self.events.iter().find(|(e, _)| e == event).map(|(_, y)| *y)
    }
}

impl KnowledgeCategory for Events {
    fn name(&self) -> &'static str {
        "events"
    }

    fn side(&self) -> Side {
        Side::Test
    }

    fn sample(&self, subject: &Entity, ctx: &mut SampleCtx<'_>, holds: bool) -> Result<KnowledgeLink, KnowledgeError> {
        let rng = &mut *ctx.rng;
        loop {
            let (event, when) = rng.pick(&self.events).clone();
            let after = rng.chance(0.5);
            let years: Vec<i32> = (Self::YEARS.0..=Self::YEARS.1)
                .filter(|&y| y != when && (if after { y > when } else { y < when }) == holds)
                .collect();
            if years.is_empty() {
                continue;
            }
            let year = *rng.pick(&years);
            let (relation, word) = if after {
                ("released_after", "after")
            } else {
                ("released_before", "before")
            };
            return Ok(KnowledgeLink {
                category: "events".into(),
                surface_facts: vec![Self::fact(subject, year)],
                bridging_body: body(
                    subject,
                    "events",
                    relation,
                    vec![event.clone()],
                    vec![],
                    format!("is watching a movie that was released {word} {event}"),
                ),
                holds,
            });
        }
    }

    fn evaluate(&self, subject: &Entity, b: &ForeignPredicate, facts: &[Literal]) -> Option<bool> {
        let fact = facts_about("events", subject, facts).find(|f| f.relation == "movie_year")?;
        let year: i32 = fact.args.first()?.parse().ok()?;
        let when = self.year_of(b.args.first()?)?;
        match b.relation.as_str() {
            "released_after" => Some(year > when),
            "released_before" => Some(year < when),
            _ => None,
        }
    }

    fn markers(&self) -> Vec<String> {
        vec!["movie".into()]
    }

    fn perturb_fact(&self, fact: &Literal, rng: &mut DetRng) -> Option<Literal> {
        let year = rng.range(Self::YEARS.0 as u64, Self::YEARS.1 as u64) as i32;
        Some(Self::fact(subject_of(fact)?, year))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::{evaluate_link, KnowledgeRegistry};
    use crate::theory::Term;

    fn dog() -> Entity {
        Entity::new("dog").unwrap()
    }

    fn lit(subject: &str, category: &str, relation: &str, args: &[&str], refs: &[&str]) -> Literal {
        Literal::new(
            Term::entity(subject),
            foreign(
                category,
                relation,
                args.iter().map(|s| s.to_string()).collect(),
                refs.iter().map(|s| Entity::new(*s).unwrap()).collect(),
                String::new(),
            ),
            None,
            false,
        )
    }

    fn eval(reg: &KnowledgeRegistry, body: &Literal, facts: &[Literal]) -> Option<bool> {
        let fp = body.predicate().as_foreign().unwrap();
        reg.get(&fp.category).unwrap().evaluate(&dog(), fp, facts)
    }

    #[test]
    fn age_phrases() {
        assert_eq!(age_amount(13.5, TimeUnit::Month), "13 months and a half");
        assert_eq!(age_amount(1.0, TimeUnit::Year), "a year");
        assert_eq!(age_amount(1.5, TimeUnit::Year), "one year and a half");
        assert_eq!(age_amount(3.0, TimeUnit::Week), "3 weeks");
    }

    #[test]
    fn money_example() {
        let reg = KnowledgeRegistry::builtin();
        let facts = vec![
            lit("dog", "money", "money", &["100"], &[]),
            lit("cat", "money", "money", &["60"], &[]),
            lit("pig", "money", "money", &["30"], &[]),
        ];
        let less = lit("dog", "money", "less_money", &[], &["cat", "pig"]);
        assert_eq!(eval(&reg, &less, &facts), Some(false));
        let more = lit("dog", "money", "more_money", &[], &["cat", "pig"]);
        assert_eq!(eval(&reg, &more, &facts), Some(true));
        // a reference without a money fact leaves the body undecided
        let more_cow = lit("dog", "money", "more_money", &[], &["cow"]);
        assert_eq!(eval(&reg, &more_cow, &facts), None);
    }

    #[test]
    fn table_lookup_negative_and_missing() {
        let reg = KnowledgeRegistry::builtin();
        let montreal = lit("dog", "places", "city", &["Montreal"], &[]);
        let canada = lit("dog", "places", "country", &["Canada"], &[]);
        let japan = lit("dog", "places", "country", &["Japan"], &[]);
        assert_eq!(eval(&reg, &canada, std::slice::from_ref(&montreal)), Some(true));
        assert_eq!(eval(&reg, &japan, std::slice::from_ref(&montreal)), Some(false));
        assert_eq!(eval(&reg, &canada, &[]), None);
    }

    #[test]
    fn every_category_samples_self_consistent_links() {
        let reg = KnowledgeRegistry::builtin();
        let mut n = 0;
        for name in reg.names() {
            for holds in [true, false] {
                for seed in 0..50 {
                    let mut rng = DetRng::new(seed);
                    let mut next = 0;
                    let mut fresh = || {
                        next += 1;
                        Entity::new(format!("e{next}")).ok()
                    };
                    let mut ctx = SampleCtx {
                        rng: &mut rng,
                        fresh: &mut fresh,
                    };
                    let link = reg.get(name).unwrap().sample(&dog(), &mut ctx, holds).unwrap();
                    assert_eq!(evaluate_link(&reg, &link).unwrap(), holds, "{name} {link:?}");
                    n += 1;
                }
            }
        }
        assert_eq!(n, 11 * 2 * 50);
    }

    #[test]
    fn perturbed_facts_keep_category_and_subject() {
        let reg = KnowledgeRegistry::builtin();
        let mut rng = DetRng::new(7);
        for name in reg.names() {
            let c = reg.get(name).unwrap();
            let mut fresh = || Entity::new("other").ok();
            let link = c
                .sample(&dog(), &mut SampleCtx { rng: &mut rng, fresh: &mut fresh }, true)
                .unwrap();
            let fact = &link.surface_facts[0];
            let p = c.perturb_fact(fact, &mut rng).unwrap();
            assert_eq!(p.subject(), fact.subject());
            assert_eq!(p.predicate().as_foreign().unwrap().category, name);
        }
    }
}
