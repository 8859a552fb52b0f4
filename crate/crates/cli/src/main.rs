use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use qmlkit::calculus::{check_derivation, search_proof, CutPolicy, Verdict};
use qmlkit::harness::soundness_suite;
use qmlkit::model::{structure_from_json, ModelFile};
use qmlkit::search::{
    count_structures, default_atoms, default_max_worlds, enumerate_structures, refute_entailment,
    Countermodel, Refutation,
};
use qmlkit::{holds, parse, truth_set, Derivation, SearchBudget, Sequent, Structure};

/// Quantum modal logic toolkit: evaluation, countermodels and proofs.
#[derive(Parser)]
#[command(name = "qmlkit", version)]
struct Cli {
    /// Machine-readable output
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a formula and print its core form
    Parse { formula: String },
    /// Truth of a formula at one world
    Eval {
        #[arg(long)]
        model: PathBuf,
        /// World index or name
        #[arg(long)]
        world: String,
        #[arg(long)]
        formula: String,
    },
    /// Worlds where a formula holds
    Truthset {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        formula: String,
    },
    /// All rq-closed world sets of a model
    Closedsets {
        #[arg(long)]
        model: PathBuf,
    },
    /// Check a model against the structure conditions
    Validate {
        #[arg(long)]
        model: PathBuf,
    },
    /// Check a derivation file
    Checkproof { file: PathBuf },
    /// Bounded backward proof search
    Prove {
        sequent: String,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value = "analytic")]
        cut: CutPolicy,
    },
    /// Search for a countermodel to a sequent
    Countermodel {
        sequent: String,
        /// Defaults to QMLKIT_MAX_WORLDS, else 4
        #[arg(long)]
        max_worlds: Option<usize>,
        /// Random sampling instead of exhaustive search: SEED,SAMPLES
        #[arg(long, value_parser = parse_random)]
        random: Option<(u64, usize)>,
    },
    /// Enumerate or count structures
    Enumerate {
        #[arg(long)]
        worlds: usize,
        #[arg(long, default_value_t = 1)]
        atoms: usize,
        /// Print counts per world count instead of the structures
        #[arg(long)]
        count: bool,
    },
    /// Check the shipped derivation corpus against countermodel search
    SoundnessSuite {
        #[arg(long)]
        max_worlds: Option<usize>,
    },
}

fn parse_random(text: &str) -> Result<(u64, usize), String> {
    let (seed, samples) = text
        .split_once(',')
        .ok_or_else(|| "expected SEED,SAMPLES".to_string())?;
    let seed = seed.trim().parse().map_err(|e| format!("seed: {e}"))?;
    let samples = samples
        .trim()
        .parse()
        .map_err(|e| format!("samples: {e}"))?;
    Ok((seed, samples))
}

/// What a command found; maps onto the exit code.
enum Outcome {
    Yes,
    No,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Yes) => ExitCode::SUCCESS,
        Ok(Outcome::No) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn emit(value: Value) {
    let mut value = value;
    value["format"] = json!(1);
    println!(
        "{}",
        serde_json::to_string_pretty(&value).expect("serialisable")
    );
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_model(path: &Path) -> Result<Structure> {
    structure_from_json(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn load_valid_model(path: &Path) -> Result<Structure> {
    let s = load_model(path)?;
    let violations = s.validate();
    if let Some(v) = violations.first() {
        bail!(
            "{}: not a valid structure ({} violation(s), first: {v})",
            path.display(),
            violations.len()
        );
    }
    Ok(s)
}

fn resolve_world(s: &Structure, world: &str) -> Result<usize> {
    if let Ok(i) = world.parse::<usize>() {
        if i < s.size() {
            return Ok(i);
        }
        bail!(
            "world {i} out of range for a structure with {} worlds",
            s.size()
        );
    }
    s.world_names()
        .iter()
        .position(|name| name == world)
        .ok_or_else(|| anyhow!("no world named '{world}'"))
}

fn set_json(s: &Structure, set: &qmlkit::WorldSet) -> Value {
    json!({
        "worlds": set.iter().collect::<Vec<_>>(),
        "names": set.iter().map(|i| s.world_name(i)).collect::<Vec<_>>(),
    })
}

fn run(cli: &Cli) -> Result<Outcome> {
    let json = cli.json;
    match &cli.command {
        Command::Parse { formula } => {
            let f = parse(formula)?;
            if json {
                emit(json!({ "ast": f.ast_string(), "text": f.to_string(), "depth": f.depth() }));
            } else {
                println!("{}", f.ast_string());
                println!("{f}");
            }
            Ok(Outcome::Yes)
        }
        Command::Eval {
            model,
            world,
            formula,
        } => {
            let s = load_valid_model(model)?;
            let i = resolve_world(&s, world)?;
            let f = parse(formula)?;
            let value = holds(&s, i, &f)?;
            if json {
                emit(json!({ "world": i, "formula": f.to_string(), "value": value }));
            } else {
                println!("{value}");
            }
            Ok(if value { Outcome::Yes } else { Outcome::No })
        }
        Command::Truthset { model, formula } => {
            let s = load_valid_model(model)?;
            let f = parse(formula)?;
            let set = truth_set(&s, &f)?;
            if json {
                let mut v = set_json(&s, &set);
                v["formula"] = json!(f.to_string());
                emit(v);
            } else {
                println!("{set}");
            }
            Ok(Outcome::Yes)
        }
        Command::Closedsets { model } => {
            let s = load_model(model)?;
            let sets = s.closed_sets()?;
            if json {
                let sets: Vec<Value> = sets.iter().map(|x| set_json(&s, x)).collect();
                emit(json!({ "closed_sets": sets }));
            } else {
                for x in &sets {
                    println!("{x}");
                }
            }
            Ok(Outcome::Yes)
        }
        Command::Validate { model } => {
            let s = load_model(model)?;
            let violations = s.validate();
            if json {
                let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
                emit(json!({ "valid": violations.is_empty(), "violations": list }));
            } else if violations.is_empty() {
                println!("ok");
            } else {
                for v in &violations {
                    println!("{v}");
                }
            }
            Ok(if violations.is_empty() {
                Outcome::Yes
            } else {
                Outcome::No
            })
        }
        Command::Checkproof { file } => {
            let d = Derivation::from_json(&read(file)?)
                .with_context(|| format!("{}", file.display()))?;
            let verdict = check_derivation(&d);
            match (&verdict, json) {
                (Verdict::Ok, true) => emit(json!({
                    "ok": true,
                    "conclusion": d.conclusion.to_string(),
                    "nodes": d.node_count(),
                })),
                (Verdict::Ok, false) => println!(
                    "ok: {} ({} nodes, height {})",
                    d.conclusion,
                    d.node_count(),
                    d.height()
                ),
                (Verdict::Failed(fail), true) => emit(json!({
                    "ok": false,
                    "path": fail.path,
                    "conclusion": fail.conclusion.to_string(),
                    "rule": fail.rule.to_string(),
                    "reason": fail.reason,
                })),
                (Verdict::Failed(fail), false) => println!("failed: {fail}"),
            }
            Ok(if verdict.is_ok() {
                Outcome::Yes
            } else {
                Outcome::No
            })
        }
        Command::Prove {
            sequent,
            depth,
            cut,
        } => {
            if *depth == 0 {
                bail!("--depth must be at least 1");
            }
            let goal = Sequent::parse(sequent)?;
            match search_proof(&goal, *depth, *cut) {
                Some(d) => {
                    if json {
                        println!("{}", d.to_json());
                    } else {
                        print!("{}", d.render());
                    }
                    Ok(Outcome::Yes)
                }
                None => {
                    if json {
                        emit(json!({ "found": false, "goal": goal.to_string(), "depth": depth }));
                    } else {
                        println!("unknown: no derivation of '{goal}' with height <= {depth}");
                    }
                    Ok(Outcome::No)
                }
            }
        }
        Command::Countermodel {
            sequent,
            max_worlds,
            random,
        } => {
            let goal = Sequent::parse(sequent)?;
            let n = max_worlds.unwrap_or_else(default_max_worlds);
            let budget = match random {
                Some((seed, samples)) => SearchBudget::random(n, *seed, *samples),
                None => SearchBudget::exhaustive(n),
            };
            let q = goal.query();
            let refutation = refute_entailment(&q, &budget)?;
            if let Some(r) = &refutation {
                if !r.verify(&q) {
                    bail!("internal error: countermodel failed re-verification");
                }
            }
            if json {
                emit(refutation_json(&goal, n, refutation.as_ref()));
            } else {
                print_refutation(&goal, n, refutation.as_ref());
            }
            Ok(if refutation.is_some() {
                Outcome::No
            } else {
                Outcome::Yes
            })
        }
        Command::Enumerate {
            worlds,
            atoms,
            count,
        } => {
            let budget = SearchBudget::exhaustive(*worlds).with_atoms(default_atoms(*atoms));
            budget.check()?;
            if *count {
                let mut total = 0u128;
                let mut per_n = BTreeMap::new();
                for n in 1..=*worlds {
                    let c = count_structures(n, *atoms)?;
                    per_n.insert(n.to_string(), c.to_string());
                    total += c;
                }
                if json {
                    emit(json!({ "atoms": atoms, "counts": per_n, "total": total.to_string() }));
                } else {
                    for (n, c) in &per_n {
                        println!("n={n}: {c}");
                    }
                    println!("total: {total}");
                }
            } else {
                for s in enumerate_structures(&budget)? {
                    let model = serde_json::to_value(ModelFile::from_structure(&s))?;
                    println!("{}", serde_json::to_string(&model)?);
                }
            }
            Ok(Outcome::Yes)
        }
        Command::SoundnessSuite { max_worlds } => {
            let n = max_worlds.unwrap_or_else(default_max_worlds);
            let report = soundness_suite(&SearchBudget::exhaustive(n))?;
            let rules = report.rules_covered();
            let failed = report.entries.iter().filter(|e| !e.passed()).count();
            if json {
                let entries: Vec<Value> = report
                    .entries
                    .iter()
                    .map(|e| {
                        json!({
                            "name": e.name,
                            "conclusion": e.conclusion.to_string(),
                            "checked": e.verdict.is_ok(),
                            "refuted": e.refutation.is_some(),
                            "node_counterexample": e.node_counterexample.as_ref().map(|c| c.sequent.to_string()),
                            "passed": e.passed(),
                        })
                    })
                    .collect();
                emit(json!({
                    "max_worlds": n,
                    "entries": entries,
                    "rules_covered": rules.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
                    "passed": report.passed(),
                }));
            } else {
                for e in &report.entries {
                    let status = if e.passed() { "ok  " } else { "FAIL" };
                    println!("{status} {:<34} {}", e.name, e.conclusion);
                    if let Verdict::Failed(fail) = &e.verdict {
                        println!("     check: {fail}");
                    }
                    if e.refutation.is_some() {
                        println!("     conclusion refuted within {n} worlds");
                    }
                    if let Some(c) = &e.node_counterexample {
                        println!("     node '{}' fails at a single world", c.sequent);
                    }
                }
                println!(
                    "{} derivations, {} failed, {}/12 rules covered, max_worlds {n}",
                    report.entries.len(),
                    failed,
                    rules.len()
                );
            }
            Ok(if report.passed() {
                Outcome::Yes
            } else {
                Outcome::No
            })
        }
    }
}

fn countermodel_json(cm: &Countermodel) -> Value {
    let mut v =
        serde_json::to_value(ModelFile::from_structure(&cm.structure)).expect("serialisable");
    v["witness_world"] = json!(cm.world);
    v
}

fn refutation_json(goal: &Sequent, n: usize, r: Option<&Refutation>) -> Value {
    let mut v = json!({ "sequent": goal.to_string(), "max_worlds": n, "refuted": r.is_some() });
    match r {
        Some(Refutation::PerFormula(map)) => {
            let map: serde_json::Map<String, Value> = map
                .iter()
                .map(|(a, cm)| (a.to_string(), countermodel_json(cm)))
                .collect();
            v["countermodels"] = Value::Object(map);
        }
        Some(Refutation::EmptySuccedent(cm)) => v["witness"] = countermodel_json(cm),
        None => {}
    }
    v
}

fn print_refutation(goal: &Sequent, n: usize, r: Option<&Refutation>) {
    match r {
        None => println!("no countermodel to '{goal}' with at most {n} worlds"),
        Some(Refutation::EmptySuccedent(cm)) => {
            println!("refuted: '{goal}'");
            println!("world satisfying the left side:");
            print_countermodel(cm);
        }
        Some(Refutation::PerFormula(map)) => {
            println!("refuted: '{goal}'");
            for (a, cm) in map {
                println!("countermodel for {a}:");
                print_countermodel(cm);
            }
        }
    }
}

fn print_countermodel(cm: &Countermodel) {
    let s = &cm.structure;
    let pairs = |pairs: Vec<(usize, usize)>| {
        if pairs.is_empty() {
            "-".to_string()
        } else {
            pairs
                .iter()
                .map(|(i, j)| format!("({i},{j})"))
                .collect::<Vec<_>>()
                .join(" ")
        }
    };
    println!("  worlds: {}", s.size());
    println!("  witness: {}", s.world_name(cm.world));
    println!("  rq: {}", pairs(s.rq().pairs()));
    println!("  rm: {}", pairs(s.rm().pairs()));
    for (atom, set) in s.valuation() {
        println!("  {atom}: {set}");
    }
}
