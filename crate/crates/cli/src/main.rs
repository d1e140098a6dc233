//! Command-line entry point: generate, solve, validate, stats, score, sample.
//!
//! Exit codes: 0 success, 2 config or usage error, 3 generation budget
//! exhausted, 4 validation failures or unmatched predictions, 5 I/O or
//! unreadable input.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use boardlogic::eval::{read_predictions, sample_for_annotation, score, EvalError};
use boardlogic::generator::Resources;
use boardlogic::pipeline::{
    build_dataset, dataset_stats, read_jsonl, verify_example, write_dataset, DatasetConfig, PipelineError,
};
use boardlogic::render::render_proof;
use boardlogic::solver::entail;
use boardlogic::theory::{DefeasibleTheory, Question};
use clap::{Parser, Subcommand};
use serde::Deserialize;

#[derive(Parser)]
#[command(name = "boardlogic", version, about = "Defeasible reasoning datasets: generate, solve, check and score")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build every split of a dataset and write <out>/<split>.jsonl.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override a config key, e.g. --set sizes=30/15/30 (repeatable).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Decide the question of a theory file and print the label and proof.
    Solve {
        #[arg(long)]
        input: PathBuf,
    },
    /// Re-solve every example of a JSONL file and replay its proof.
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Print statistics of one or more JSONL files.
    Stats {
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
    },
    /// Score a prediction file against a gold JSONL file.
    Score {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
    },
    /// Pick decided examples for manual proof review.
    Sample {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Budget(String),
    Validation(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Budget(_) => 3,
            Failure::Validation(_) => 4,
            Failure::Io(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Budget(m) | Failure::Validation(m) | Failure::Io(m) => m,
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let m = e.to_string();
        match e {
            PipelineError::Config(_) | PipelineError::Resource { .. } => Failure::Usage(m),
            PipelineError::Generation { .. } => Failure::Budget(m),
            PipelineError::Verification { .. } => Failure::Validation(m),
            PipelineError::Io { .. } | PipelineError::Parse { .. } => Failure::Io(m),
        }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        let m = e.to_string();
        match e {
            EvalError::Io { .. } | EvalError::Parse { .. } => Failure::Io(m),
            EvalError::UnknownId(_) | EvalError::DuplicateId(_) | EvalError::EmptyGold => Failure::Validation(m),
        }
    }
}

fn print_json<T: serde::Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("reports serialize"));
}

fn echo<T: serde::Serialize>(v: &T) {
    eprintln!("{}", serde_json::to_string(v).expect("config serializes"));
}

fn generate(config: &Path, out: &Path, overrides: &[String], seed: Option<u64>) -> Result<(), Failure> {
    let mut cfg = DatasetConfig::load(config).map_err(|e| Failure::Usage(e.to_string()))?;
    for kv in overrides {
        cfg.apply_override(kv).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    echo(&cfg);
    let res = Resources::from_config(&cfg)?;
    let ds = build_dataset(&cfg, &res)?;
    let paths = write_dataset(&ds, out)?;
    let summary: Vec<serde_json::Value> = ds
        .splits
        .iter()
        .zip(&paths)
        .map(|(s, p)| {
            serde_json::json!({
                "split": s.split,
                "path": p.display().to_string(),
                "examples": s.examples.len(),
            })
        })
        .collect();
    print_json(&summary);
    Ok(())
}

#[derive(Deserialize)]
struct TheoryFile {
    theory: DefeasibleTheory,
    question: Question,
}

fn solve(input: &Path) -> Result<(), Failure> {
    eprintln!("{{\"input\":{:?}}}", input.display().to_string());
    let text = std::fs::read_to_string(input).map_err(|e| Failure::Io(format!("{}: {e}", input.display())))?;
    let file: TheoryFile =
        serde_json::from_str(&text).map_err(|e| Failure::Io(format!("{}: {e}", input.display())))?;
    let res = Resources::builtin();
    let r = entail(&file.theory, &file.question, &res.knowledge).map_err(|e| Failure::Validation(e.to_string()))?;
    println!("{}", r.label);
    let proof = r.proof.clone().unwrap_or_default();
    let text = render_proof(&proof, &file.theory, &file.question, r.label, &r.derived)
        .map_err(|e| Failure::Validation(e.to_string()))?;
    println!("{text}");
    if let Some(p) = &r.proof {
        println!("{}", serde_json::to_string(p).expect("proofs serialize"));
    }
    Ok(())
}

fn validate(input: &Path) -> Result<(), Failure> {
    eprintln!("{{\"input\":{:?}}}", input.display().to_string());
    let examples = read_jsonl(input)?;
    let res = Resources::builtin();
    let mut failed = 0;
    for e in &examples {
        if let Err(err) = verify_example(e, &res) {
            failed += 1;
            eprintln!("FAIL {err}");
        }
    }
    print_json(&serde_json::json!({
        "checked": examples.len(),
        "passed": examples.len() - failed,
        "failed": failed,
    }));
    if failed > 0 {
        return Err(Failure::Validation(format!("{failed} example(s) failed")));
    }
    Ok(())
}

fn stats(inputs: &[PathBuf]) -> Result<(), Failure> {
    eprintln!("{}", serde_json::json!({ "input": inputs }));
    let mut out = serde_json::Map::new();
    for p in inputs {
        let examples = read_jsonl(p)?;
        let s = serde_json::to_value(dataset_stats(&examples)).expect("stats serialize");
        out.insert(p.display().to_string(), s);
    }
    print_json(&out);
    Ok(())
}

fn score_cmd(gold: &Path, pred: &Path) -> Result<(), Failure> {
    eprintln!("{}", serde_json::json!({ "gold": gold, "pred": pred }));
    let g = read_jsonl(gold)?;
    let p = read_predictions(pred)?;
    print_json(&score(&p, &g)?);
    Ok(())
}

fn sample(gold: &Path, n: usize, seed: u64) -> Result<(), Failure> {
    eprintln!("{}", serde_json::json!({ "gold": gold, "n": n, "seed": seed }));
    let g = read_jsonl(gold)?;
    for e in sample_for_annotation(&g, n, seed) {
        let row = serde_json::json!({
            "id": e.id,
            "text": e.text,
            "label": e.label,
            "proof_text": e.proof_text,
        });
        println!("{row}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Generate {
            config,
            out,
            overrides,
            seed,
        } => generate(config, out, overrides, *seed),
        Command::Solve { input } => solve(input),
        Command::Validate { input } => validate(input),
        Command::Stats { input } => stats(input),
        Command::Score { gold, pred } => score_cmd(gold, pred),
        Command::Sample { gold, n, seed } => sample(gold, *n, *seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
