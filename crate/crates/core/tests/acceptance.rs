//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run alone with `cargo test -p boardlogic --test acceptance`.

mod common;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use boardlogic::eval::{gold_predictions, score, Prediction};
use boardlogic::generator::{Example, Resources};
use boardlogic::knowledge::{fits_in_box, Age, Calendar, KnowledgeRegistry, SampleCtx, Solid};
use boardlogic::pipeline::{
    build_dataset, dataset_stats, generate_indexed, read_jsonl, verify_example, write_dataset, Dataset,
    DatasetConfig, Sizes,
};
use boardlogic::render::render_proof;
use boardlogic::rng::{derive_seed, DetRng};
use boardlogic::solver::{brute_force_entail, entail, ConflictKind, DEFAULT_ATOM_BOUND};
use boardlogic::theory::{tweety, Entity, ForeignPredicate, Label, Literal, Predicate, RuleId, Term};
use boardlogic::vocab::{Side, Split};
use rayon::prelude::*;
use regex::Regex;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn presets_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets")
}

fn preset(name: &str) -> DatasetConfig {
    DatasetConfig::load(&presets_dir().join(name)).unwrap_or_else(|e| panic!("preset {name}: {e}"))
}

fn build(cfg: &DatasetConfig) -> Dataset {
    let res = Resources::from_config(cfg).unwrap();
    build_dataset(cfg, &res).unwrap_or_else(|e| panic!("{}: {e}", cfg.name))
}

/// Shared state produced by earlier criteria and reused by later ones.
struct Runs {
    small: Vec<(String, Dataset)>,
    full: Vec<(String, Dataset)>,
}

fn oracle_equivalence() -> Outcome {
    let oracle = KnowledgeRegistry::builtin();
    let start = Instant::now();
    let mut disagreements = Vec::new();
    let (mut type1, mut type2, mut with_conflict) = (0, 0, 0);
    let n = 10_000u64;
    for i in 0..n {
        let (t, q) = common::random_theory(derive_seed(0xACCE, "oracle", i));
        let fast = entail(&t, &q, &oracle).map(|r| {
            if let Some(p) = &r.proof {
                type1 += p.conflicts.iter().filter(|c| c.kind == ConflictKind::Type1).count();
                type2 += p.conflicts.iter().filter(|c| c.kind == ConflictKind::Type2).count();
            }
            r.label
        });
        with_conflict += (!t.preferences.is_empty()) as usize;
        let slow = brute_force_entail(&t, &q, &oracle, DEFAULT_ATOM_BOUND);
        if fast != slow {
            disagreements.push(i);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        disagreements.is_empty() && secs < 60.0 && type1 > 0 && type2 > 0,
        format!(
            "{n} theories, {} disagreements, {with_conflict} with preferences, proof conflicts {type1} Type1 / {type2} Type2, {secs:.1} s",
            disagreements.len()
        ),
    )
}

fn tweety_exactness() -> Outcome {
    let (t, q) = tweety();
    let oracle = KnowledgeRegistry::builtin();
    let r = entail(&t, &q, &oracle).unwrap();
    let proof = r.proof.clone().unwrap_or_default();
    let beats = proof
        .conflicts
        .iter()
        .any(|c| c.winner == RuleId(3) && c.loser == RuleId(2));
    let text = render_proof(&proof, &t, &q, r.label, &r.derived).unwrap_or_default();
    let says = text.contains("Rule3 overrides Rule2") && text.contains("Tweety does not fly");
    outcome(
        r.label == Label::Disproved && beats && says,
        format!("label {}, conflicts {:?}", r.label, proof.conflicts.iter().map(|c| (c.winner.to_string(), c.loser.to_string())).collect::<Vec<_>>()),
    )
}

const PRESETS: [&str; 19] = [
    "main-d1",
    "main-d2",
    "main-d3",
    "no-conflict",
    "low-conflict",
    "medium-conflict",
    "high-conflict",
    "conf-type1-0.2",
    "conf-type1-0.5",
    "conf-type1-0.8",
    "knowledge-light",
    "knowledge-medium",
    "knowledge-heavy",
    "no-distractors",
    "some-distractors",
    "many-distractors",
    "binary-d1",
    "binary-d2",
    "binary-d3",
];

fn round_trip(runs: &mut Runs) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let res = Resources::builtin();
    let mut checked = 0;
    let mut failures = Vec::new();
    for name in PRESETS {
        let mut cfg = preset(name);
        cfg.apply_override("sizes=30/15/30").unwrap();
        let ds = build(&cfg);
        let paths = write_dataset(&ds, &dir.path().join(name)).unwrap();
        for p in paths {
            for e in read_jsonl(&p).unwrap() {
                checked += 1;
                if let Err(err) = verify_example(&e, &res) {
                    failures.push(err.to_string());
                }
            }
        }
        runs.small.push((name.to_string(), ds));
    }
    let cfg = preset("main-d3");
    let start = Instant::now();
    let full = build(&cfg);
    let took = start.elapsed();
    runs.full.push(("main-d3".into(), full));
    outcome(
        failures.is_empty() && checked == 19 * 75 && took < Duration::from_secs(300),
        format!(
            "{checked} reduced-size examples re-solved and replayed, {} failures; full depth-3 build {:.1} s{}",
            failures.len(),
            took.as_secs_f64(),
            failures.first().map(|f| format!(" (first: {f})")).unwrap_or_default()
        ),
    )
}

fn balance(runs: &mut Runs) -> Outcome {
    for name in ["main-d1", "main-d2", "binary-d2"] {
        let ds = build(&preset(name));
        runs.full.push((name.into(), ds));
    }
    let mut bad = Vec::new();
    let mut seen = Vec::new();
    for (name, ds) in &runs.full {
        let cfg = preset(name);
        for s in &ds.splits {
            let want = Sizes::default().get(s.split);
            let st = dataset_stats(&s.examples);
            let labels = cfg.labels.labels();
            let counts: Vec<usize> = labels.iter().map(|l| st.labels.get(l.as_str()).copied().unwrap_or(0)).collect();
            let lo = counts.iter().min().unwrap();
            let hi = counts.iter().max().unwrap();
            let extra = st.labels.len() != labels.len();
            if s.examples.len() != want || hi - lo > 1 || extra {
                bad.push(format!("{name}/{}: {} {:?}", s.split, s.examples.len(), st.labels));
            }
            seen.push(format!("{name}/{}={counts:?}", s.split));
        }
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} full-size splits exact and balanced", seen.len())
        } else {
            bad.join("; ")
        },
    )
}

/// Train-split examples `0..n` of a preset.
fn train_examples(cfg: &DatasetConfig, n: usize) -> Vec<Example> {
    let res = Resources::from_config(cfg).unwrap();
    (0..n)
        .into_par_iter()
        .map(|i| generate_indexed(cfg, &res, Split::Train, i).unwrap())
        .collect()
}

fn conflict_knob() -> Outcome {
    let mut lines = Vec::new();
    let mut incidences = Vec::new();
    let mut ok = true;
    for name in ["no-conflict", "low-conflict", "medium-conflict", "high-conflict"] {
        let cfg = preset(name);
        let examples = train_examples(&cfg, 1000);
        // incidence read off the theories themselves: preferences only ever order a conflict
        let with_pref = examples.iter().filter(|e| !e.theory.preferences.is_empty()).count();
        let incidence = with_pref as f64 / examples.len() as f64;
        let st = dataset_stats(&examples);
        let rate = st.conflict_rate();
        if (rate - cfg.gen.p_conf).abs() > 0.05 {
            ok = false;
        }
        incidences.push(incidence);
        lines.push(format!("{name}: incidence {incidence:.3}, per-step {rate:.3} vs {}", cfg.gen.p_conf));
    }
    let zero = incidences[0] == 0.0;
    let increasing = incidences[1..].windows(2).all(|w| w[0] < w[1]);
    outcome(ok && zero && increasing, lines.join("; "))
}

fn type_knob() -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for name in ["conf-type1-0.2", "conf-type1-0.5", "conf-type1-0.8"] {
        let cfg = preset(name);
        let res = Resources::from_config(&cfg).unwrap();
        let (mut t1, mut t2, mut conflicted, mut n) = (0usize, 0usize, 0usize, 0usize);
        while conflicted < 1000 {
            let batch: Vec<Example> = (n..n + 500)
                .into_par_iter()
                .map(|i| generate_indexed(&cfg, &res, Split::Train, i).unwrap())
                .collect();
            n += 500;
            for e in &batch {
                if let Some(p) = e.proof.as_ref().filter(|p| !p.conflicts.is_empty()) {
                    conflicted += 1;
                    t1 += p.conflicts.iter().filter(|c| c.kind == ConflictKind::Type1).count();
                    t2 += p.conflicts.iter().filter(|c| c.kind == ConflictKind::Type2).count();
                }
            }
        }
        let share = t1 as f64 / (t1 + t2) as f64;
        if (share - cfg.gen.p_conf_type1).abs() > 0.07 {
            ok = false;
        }
        lines.push(format!("{name}: Type1 share {share:.3} over {conflicted} conflicted examples"));
    }
    outcome(ok, lines.join("; "))
}

struct SideVocab {
    entities: Vec<String>,
    predicates: Vec<String>,
    signatures: Vec<String>,
    categories: Vec<String>,
    markers: Vec<String>,
}

fn side_vocab(res: &Resources, side: Side) -> SideVocab {
    let cats = res.knowledge.for_side(side);
    SideVocab {
        entities: res.vocab.entities(side).to_vec(),
        predicates: res.vocab.predicates(side).to_vec(),
        signatures: res.templates.signatures(side),
        categories: cats.iter().map(|c| c.name().to_string()).collect(),
        markers: cats.iter().flat_map(|c| c.markers()).collect(),
    }
}

fn literals(e: &Example) -> impl Iterator<Item = &Literal> {
    e.theory
        .facts
        .iter()
        .chain(e.theory.rules.iter().flat_map(|r| r.body.iter().chain([&r.head])))
        .chain([e.question.literal()])
}

/// Problems found in one example against the vocabulary of the other side.
fn leaks(e: &Example, own: &SideVocab, other: &SideVocab, entity_res: &[(String, Regex)]) -> Vec<String> {
    let mut out = Vec::new();
    for l in literals(e) {
        for ent in l.entities() {
            if other.entities.iter().any(|x| x == ent.as_str()) || !own.entities.iter().any(|x| x == ent.as_str()) {
                out.push(format!("entity {ent}"));
            }
        }
        match l.predicate() {
            Predicate::Known(p) => {
                if other.predicates.contains(p) || !own.predicates.contains(p) {
                    out.push(format!("predicate {p}"));
                }
            }
            Predicate::Foreign(f) => {
                if other.categories.contains(&f.category) {
                    out.push(format!("category {}", f.category));
                }
            }
        }
    }
    for c in &e.metadata.knowledge_categories {
        if other.categories.contains(c) {
            out.push(format!("category {c}"));
        }
    }
    for (name, re) in entity_res {
        if re.is_match(&e.text) {
            out.push(format!("text mentions {name}"));
        }
    }
    for s in &other.signatures {
        if e.text.contains(s.as_str()) {
            out.push(format!("template {s:?}"));
        }
    }
    for m in &other.markers {
        if e.text.contains(m.as_str()) {
            out.push(format!("marker {m:?}"));
        }
    }
    out
}

/// Distinct leak descriptions, without the example ids.
fn leak_kinds(problems: &[String]) -> String {
    let kinds: std::collections::BTreeSet<&str> =
        problems.iter().filter_map(|p| p.split_once(": ").map(|(_, k)| k)).collect();
    if kinds.is_empty() {
        String::new()
    } else {
        format!(" {kinds:?}")
    }
}

fn disjointness(runs: &Runs) -> Outcome {
    let res = Resources::builtin();
    let train = side_vocab(&res, Side::Train);
    let test = side_vocab(&res, Side::Test);
    let overlap = |a: &[String], b: &[String]| a.iter().filter(|x| b.contains(x)).count();
    let static_overlap = overlap(&train.entities, &test.entities)
        + overlap(&train.predicates, &test.predicates)
        + overlap(&train.signatures, &test.signatures)
        + overlap(&train.categories, &test.categories);
    let mentions = |v: &SideVocab| -> Vec<(String, Regex)> {
        v.entities
            .iter()
            .map(|n| (n.clone(), Regex::new(&format!(r"\b[Tt]he {}\b", regex::escape(n))).unwrap()))
            .collect()
    };
    let (train_mentions, test_mentions) = (mentions(&train), mentions(&test));
    let mut scanned = 0;
    let mut problems = Vec::new();
    for (_, ds) in runs.small.iter().chain(&runs.full) {
        for s in &ds.splits {
            let (own, other, re) = match s.split.side() {
                Side::Train => (&train, &test, &test_mentions),
                Side::Test => (&test, &train, &train_mentions),
            };
            for e in &s.examples {
                scanned += 1;
                for p in leaks(e, own, other, re) {
                    problems.push(format!("{}: {p}", e.id));
                }
            }
        }
    }
    outcome(
        static_overlap == 0 && problems.is_empty(),
        format!(
            "{scanned} examples scanned, {} leaks, {static_overlap} shared vocabulary items{}",
            problems.len(),
            leak_kinds(&problems)
        ),
    )
}

fn foreign(subject: &str, category: &str, relation: &str, args: &[&str]) -> Literal {
    Literal::new(
        Term::entity(subject),
        Predicate::Foreign(ForeignPredicate {
            category: category.into(),
            relation: relation.into(),
            args: args.iter().map(|s| s.to_string()).collect(),
            refs: vec![],
            phrase: String::new(),
        }),
        None,
        false,
    )
}

fn knowledge_oracle() -> Outcome {
    let reg = KnowledgeRegistry::builtin();
    let dog = Entity::new("dog").unwrap();
    let ask = |fact: Literal, body: Literal| -> Option<bool> {
        let fp = body.predicate().as_foreign().unwrap();
        reg.get(&fp.category)?.evaluate(&dog, fp, &[fact])
    };
    let worked = [
        (
            "13.5 months > 1 year",
            ask(foreign("dog", "age", "age", &["13.5", "month"]), foreign("dog", "age", "older_than", &["1", "year"])),
            Some(true),
        ),
        (
            "2+5 < 10",
            ask(
                foreign("dog", "friends", "friends", &["2", "5", "kind"]),
                foreign("dog", "friends", "fewer_friends", &["10"]),
            ),
            Some(true),
        ),
        (
            "Montreal is in Canada",
            ask(foreign("dog", "places", "city", &["Montreal"]), foreign("dog", "places", "country", &["Canada"])),
            Some(true),
        ),
        (
            "radius-29 ball in 26.3x25.6x24.2 box",
            fits_in_box(Solid::Sphere { radius: 29.0 }, [26.3, 25.6, 24.2]).ok(),
            Some(false),
        ),
        (
            "2005 release before Covid19",
            ask(
                foreign("dog", "events", "movie_year", &["2005"]),
                foreign("dog", "events", "released_before", &["Covid19 started"]),
            ),
            Some(true),
        ),
    ];
    let wrong: Vec<&str> = worked.iter().filter(|(_, got, want)| got != want).map(|(n, ..)| *n).collect();

    // the same age links under every plausible calendar convention
    let age = reg.get("age").unwrap();
    let calendars: Vec<Calendar> = [28.0, 29.0, 30.0, 30.44, 31.0]
        .iter()
        .flat_map(|&m| {
            [360.0, 364.0, 365.0, 365.25, 366.0].map(|y| Calendar {
                month_days: m,
                year_days: y,
            })
        })
        .collect();
    let mut rng = DetRng::new(0xA6E);
    let mut flips = 0;
    for i in 0..1000 {
        let holds = i % 2 == 0;
        let mut fresh = || Entity::new("other").ok();
        let link = age
            .sample(&dog, &mut SampleCtx { rng: &mut rng, fresh: &mut fresh }, holds)
            .unwrap();
        let fact = link.surface_facts[0].predicate().as_foreign().unwrap();
        let body = link.bridging_body.predicate().as_foreign().unwrap();
        for cal in &calendars {
            if Age::compare(*cal, &fact.args, &body.relation, &body.args) != Some(holds) {
                flips += 1;
            }
        }
    }
    outcome(
        wrong.is_empty() && flips == 0,
        format!(
            "{} of 5 worked values reproduced{}; {flips} truth flips over 1000 age links x {} calendars",
            5 - wrong.len(),
            if wrong.is_empty() { String::new() } else { format!(" (wrong: {})", wrong.join(", ")) },
            calendars.len()
        ),
    )
}

fn metrics(runs: &Runs) -> Outcome {
    let (_, ds) = runs.full.iter().find(|(n, _)| n == "main-d3").unwrap();
    let mut perfect = true;
    for s in &ds.splits {
        let r = score(&gold_predictions(&s.examples), &s.examples).unwrap();
        perfect &= r.accuracy == 1.0 && r.rule_f1 == Some(1.0) && r.conflict_f1 == Some(1.0);
    }
    let test = ds.split(Split::Test).unwrap();
    let mut worst: f64 = 0.0;
    for l in Label::ALL {
        let preds: Vec<Prediction> = test
            .iter()
            .map(|e| Prediction {
                id: e.id.clone(),
                label: l,
                proof_text: None,
            })
            .collect();
        let acc = score(&preds, test).unwrap().accuracy;
        worst = worst.max((acc - 1.0 / 3.0).abs());
    }
    outcome(
        perfect && worst <= 0.04 && test.len() == 1000,
        format!("gold self-score perfect on all splits: {perfect}; constant baselines within {worst:.4} of 1/3 on {} test examples", test.len()),
    )
}

fn determinism(runs: &Runs) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let (name, first) = runs.full.iter().find(|(n, _)| n == "main-d1").unwrap();
    let second = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap()
        .install(|| build(&preset(name)));
    let a = write_dataset(first, &dir.path().join("a")).unwrap();
    let b = write_dataset(&second, &dir.path().join("b")).unwrap();
    let mut bytes = 0;
    let mut same = true;
    for (x, y) in a.iter().zip(&b) {
        let (x, y) = (std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
        bytes += x.len();
        same &= x == y;
    }
    outcome(same, format!("{name}: two full runs, {bytes} bytes, identical: {same}"))
}

fn main() -> ExitCode {
    let mut runs = Runs {
        small: Vec::new(),
        full: Vec::new(),
    };
    let start = Instant::now();
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut run = |name: &'static str, f: &mut dyn FnMut(&mut Runs) -> Outcome, runs: &mut Runs| {
        let t = Instant::now();
        let o = f(runs);
        println!(
            "{} [{:>2}] {name}: {} ({:.1} s)",
            if o.pass { "PASS" } else { "FAIL" },
            results.len() + 1,
            o.detail,
            t.elapsed().as_secs_f64()
        );
        results.push((name, o));
    };
    run("oracle equivalence", &mut |_| oracle_equivalence(), &mut runs);
    run("penguin example", &mut |_| tweety_exactness(), &mut runs);
    run("round-trip labels", &mut round_trip, &mut runs);
    run("balance and sizing", &mut balance, &mut runs);
    run("conflict knob", &mut |_| conflict_knob(), &mut runs);
    run("type knob", &mut |_| type_knob(), &mut runs);
    run("split disjointness", &mut |r| disjointness(r), &mut runs);
    run("knowledge oracle", &mut |_| knowledge_oracle(), &mut runs);
    run("metric correctness", &mut |r| metrics(r), &mut runs);
    run("determinism", &mut |r| determinism(r), &mut runs);
    let failed = results.iter().filter(|(_, o)| !o.pass).count();
    println!(
        "acceptance: {} passed, {failed} failed in {:.0} s",
        results.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
