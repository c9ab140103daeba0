//! Command-line front end for the rlogic workbench.
//!
//! Subcommands: `gen` (structure families), `corpus` (formula catalogue),
//! `eval` (model checking), `prob` (satisfaction probabilities), `gap`
//! (gap classification), `amplify` (copy amplification), `design` and
//! `prg` (seed-stretching machinery), `experiment` (named reproduction
//! runs). Exit codes: 0 when everything passed, 1 when any experiment
//! check failed, 2 for usage or input errors.

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use rlogic::corpus;
use rlogic::derand::{cover_search, suggest_prg_parameters, CoverProblem, PartialDesign, SeedMode};
use rlogic::experiments::{experiment_names, run_experiment, ExperimentOptions, ExperimentReport};
use rlogic::generators::{
    builtin_base_graph, gen_cfi, gen_matching_ba, gen_sparse_additive, gen_tcfi_capped, is_sparse,
    random_3regular, BaseGraphName, CfiSpec, MatchingBaSpec, SparseSet,
};
use rlogic::logic::{evaluate_with, parse, query_with, Assignment, EvalOptions};
use rlogic::randsem::{
    amplification_plan, amplify, bp_query, check_gap, exact_probability_capped, mc_probability,
    GapSpec, Prob, ProbMode, RandomSpace, DEFAULT_MC_DELTA, DEFAULT_MC_EPSILON,
};
use rlogic::structure::{Builtin, RelationSymbol, Structure, StructureFile, Vocabulary};

#[derive(Parser)]
#[command(name = "rlogic", version, about = "randomised-logic workbench")]
struct Cli {
    /// Seed for all randomised operations.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Sample count for Monte Carlo estimates (0 = per-command default).
    #[arg(long, global = true, default_value_t = 0)]
    samples: u64,
    /// Bit cap for exact probability enumeration.
    #[arg(long, global = true, default_value_t = 24)]
    cap: u32,
    /// Output format for reports and estimates.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Test tier: slow includes the full-sentence CFI checks.
    #[arg(long, global = true, value_enum, default_value_t = Tier::Fast)]
    tier: Tier,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Tier {
    Fast,
    Slow,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a structure and write it in the structure file format.
    Gen {
        #[command(subcommand)]
        family: GenFamily,
    },
    /// List the formula corpus or print one of its formulas.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
    /// Evaluate a formula on a structure (query it when variables are free).
    Eval {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        formula: String,
        /// Bindings like `x=0,y=2`.
        #[arg(long)]
        assign: Option<String>,
        /// Cap for set-quantifier enumeration.
        #[arg(long, default_value_t = 20)]
        set_cap: usize,
    },
    /// Satisfaction probability over a random expansion space.
    Prob {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        formula: String,
        /// Random vocabulary like `R/2` or `R1/1,R2/1`.
        #[arg(long)]
        rho: String,
        #[arg(long, conflicts_with = "mc")]
        exact: bool,
        #[arg(long)]
        mc: bool,
        #[arg(long, default_value_t = DEFAULT_MC_EPSILON)]
        epsilon: f64,
        #[arg(long, default_value_t = DEFAULT_MC_DELTA)]
        delta: f64,
        #[arg(long)]
        assign: Option<String>,
    },
    /// Classify a formula's probability against an (alpha, beta] gap, or
    /// run the gap-based query over the structure's tuples.
    Gap {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        formula: String,
        #[arg(long)]
        rho: String,
        /// Rationals like `1/3`.
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
        /// Evaluate the tuple query instead of classifying the sentence.
        #[arg(long)]
        query: bool,
        #[arg(long)]
        assign: Option<String>,
    },
    /// Widen a probability gap by combining renamed copies.
    Amplify {
        #[arg(long)]
        formula: String,
        #[arg(long)]
        rho: String,
        #[arg(long, requires = "l")]
        n: Option<usize>,
        #[arg(long, requires = "n")]
        l: Option<usize>,
        /// Plan (n, l) from gap bounds instead: `--plan 1/3,2/3,1/100,99/100`.
        #[arg(long, conflicts_with = "n")]
        plan: Option<String>,
    },
    /// Build, check or suggest partial designs.
    Design {
        #[command(subcommand)]
        action: DesignAction,
    },
    /// Compare generator-driven and truly random satisfaction probability.
    Prg {
        #[command(subcommand)]
        action: PrgAction,
    },
    /// Run a named reproduction experiment (or `all`).
    Experiment {
        /// One of birthday, cfi, rescher, sparse, amplification, derand, all.
        name: String,
    },
    /// Search for XOR-translate covers of a cube subset.
    Cover {
        /// Cube dimension (at most 20).
        #[arg(long)]
        l: usize,
        /// Member points, e.g. `0,1,2,5`.
        #[arg(long)]
        members: String,
        /// Number of translates.
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1000)]
        attempts: u64,
    },
}

#[derive(Subcommand)]
enum GenFamily {
    /// The empty-vocabulary structure on n elements.
    Empty {
        #[arg(long)]
        n: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// The canonical arithmetic structure, restricted to chosen built-ins.
    Arithmetic {
        #[arg(long)]
        n: usize,
        /// Comma-separated subset of leq,plus,times.
        #[arg(long, default_value = "leq,plus,times")]
        rels: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// A CFI graph over a named 3-regular base.
    Cfi {
        #[arg(long, default_value = "k4")]
        base: String,
        /// Twisted edge indices, e.g. `0,2`.
        #[arg(long, default_value = "")]
        twist: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// The Boolean-algebra augmentation of a CFI graph.
    Tcfi {
        #[arg(long, default_value = "theta")]
        base: String,
        #[arg(long, default_value = "")]
        twist: String,
        /// Cap on the algebra size 2^m.
        #[arg(long, default_value_t = 1 << 12)]
        ba_cap: u64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// A matched order next to a Boolean algebra.
    MatchingBa {
        #[arg(long)]
        pairs: usize,
        #[arg(long)]
        atoms: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// An additive structure with a unary predicate.
    Sparse {
        /// Elements, e.g. `1,4,13,40`.
        #[arg(long)]
        set: String,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// A random simple connected 3-regular graph over {E}.
    Random3reg {
        #[arg(long)]
        vertices: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CorpusAction {
    /// List the catalogue.
    List,
    /// Print a formula in the concrete grammar.
    Print {
        name: String,
        /// Index parameter (phi_ith, coin).
        #[arg(long)]
        i: Option<usize>,
        /// Relation count (psi_s).
        #[arg(long)]
        k: Option<usize>,
        /// Subset like `0,1` (psi_s).
        #[arg(long)]
        set: Option<String>,
    },
}

#[derive(Subcommand)]
enum DesignAction {
    Build {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        degree: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    Check {
        #[arg(long)]
        file: PathBuf,
    },
    Suggest {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        depth: usize,
    },
}

#[derive(Subcommand)]
enum PrgAction {
    Compare {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        formula: String,
        #[arg(long)]
        rho: String,
        /// A design file from `design build`; defaults to suggested
        /// parameters for the space's bit budget.
        #[arg(long)]
        design: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = PrgSeedMode::Exact)]
        mode: PrgSeedMode,
        #[arg(long, default_value_t = 0.02)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PrgSeedMode {
    Exact,
    Mc,
}

fn parse_fraction(text: &str) -> Result<Prob> {
    Prob::from_str(text.trim())
        .map_err(|e| anyhow!("`{text}` is not a rational (use forms like 1/3): {e}"))
}

fn parse_rho(text: &str) -> Result<Vocabulary> {
    let mut symbols = Vec::new();
    for part in text.split(',').filter(|p| !p.is_empty()) {
        let (name, arity) = part
            .split_once('/')
            .ok_or_else(|| anyhow!("`{part}` should look like NAME/ARITY"))?;
        symbols.push(RelationSymbol::new(name.trim(), arity.trim().parse()?));
    }
    Ok(Vocabulary::new(symbols)?)
}

fn parse_assignment(text: Option<&str>) -> Result<Assignment> {
    let mut asg = Assignment::new();
    if let Some(text) = text {
        for part in text.split(',').filter(|p| !p.is_empty()) {
            let (var, value) = part
                .split_once('=')
                .ok_or_else(|| anyhow!("`{part}` should look like VAR=VALUE"))?;
            asg = asg.bind(var.trim(), value.trim().parse::<usize>()?);
        }
    }
    Ok(asg)
}

fn parse_usize_set(text: &str) -> Result<BTreeSet<usize>> {
    text.split(',')
        .filter(|p| !p.is_empty())
        .map(|p| Ok(p.trim().parse()?))
        .collect()
}

fn load_structure(path: &PathBuf) -> Result<Structure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading structure file {}", path.display()))?;
    let file: StructureFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing structure file {}", path.display()))?;
    Ok(file.into_structure()?)
}

fn emit_structure(s: &Structure, out: Option<PathBuf>) -> Result<()> {
    let json = serde_json::to_string_pretty(&StructureFile::from_structure(s))?;
    match out {
        Some(path) => {
            fs::write(&path, json + "\n").with_context(|| format!("writing {}", path.display()))?
        }
        None => println!("{json}"),
    }
    Ok(())
}

fn parse_base(name: &str) -> Result<BaseGraphName> {
    BaseGraphName::parse(name)
        .ok_or_else(|| anyhow!("unknown base graph `{name}` (k4, prism, petersen, theta)"))
}

fn print_report(report: &ExperimentReport, format: Format) -> Result<()> {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(report)?),
        Format::Csv => {
            println!("experiment,id,criterion,verdict,observed,expected");
            for check in &report.checks {
                let verdict = serde_json::to_value(check.verdict)?;
                println!(
                    "{},{},{},{},{:?},{:?}",
                    report.experiment,
                    check.id,
                    check.criterion,
                    verdict.as_str().unwrap_or("?"),
                    check.observed,
                    check.expected,
                );
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let mode = ProbMode::Auto {
        cap: cli.cap,
        epsilon: DEFAULT_MC_EPSILON,
        delta: DEFAULT_MC_DELTA,
        seed: cli.seed,
    };
    match cli.command {
        Command::Gen { family } => {
            match family {
                GenFamily::Empty { n, out } => emit_structure(&Structure::empty(n)?, out)?,
                GenFamily::Arithmetic { n, rels, out } => {
                    let mut which = Vec::new();
                    for part in rels.split(',').filter(|p| !p.is_empty()) {
                        which.push(
                            Builtin::from_name(part.trim())
                                .ok_or_else(|| anyhow!("unknown built-in `{part}`"))?,
                        );
                    }
                    emit_structure(&Structure::arithmetic(n, &which)?, out)?;
                }
                GenFamily::Cfi { base, twist, out } => {
                    let spec = CfiSpec::new(
                        builtin_base_graph(parse_base(&base)?),
                        parse_usize_set(&twist)?,
                    )?;
                    emit_structure(&gen_cfi(&spec)?, out)?;
                }
                GenFamily::Tcfi {
                    base,
                    twist,
                    ba_cap,
                    out,
                } => {
                    let spec = CfiSpec::new(
                        builtin_base_graph(parse_base(&base)?),
                        parse_usize_set(&twist)?,
                    )?;
                    emit_structure(&gen_tcfi_capped(&spec, ba_cap)?, out)?;
                }
                GenFamily::MatchingBa { pairs, atoms, out } => {
                    emit_structure(&gen_matching_ba(&MatchingBaSpec::new(pairs, atoms)?)?, out)?;
                }
                GenFamily::Sparse { set, out } => {
                    let q: SparseSet = parse_usize_set(&set)?;
                    eprintln!("sparse: {}", is_sparse(&q));
                    emit_structure(&gen_sparse_additive(&q)?, out)?;
                }
                GenFamily::Random3reg { vertices, out } => {
                    let graph = random_3regular(vertices, cli.seed)?;
                    let mut edges = BTreeSet::new();
                    for &(u, v) in graph.edges() {
                        edges.insert(vec![u, v]);
                        edges.insert(vec![v, u]);
                    }
                    let mut rels = std::collections::BTreeMap::new();
                    rels.insert("E".to_string(), (2usize, edges));
                    emit_structure(&Structure::empty(vertices)?.expand(rels)?, out)?;
                }
            }
            Ok(true)
        }
        Command::Corpus { action } => {
            match action {
                CorpusAction::List => {
                    for entry in corpus::entries() {
                        let vocab: Vec<String> = entry
                            .vocabulary
                            .iter()
                            .map(|(n, a)| format!("{n}/{a}"))
                            .collect();
                        println!(
                            "{:<16} params: {:<44} family: {:<44} vocabulary: {}",
                            entry.name,
                            entry.parameters,
                            entry.family,
                            vocab.join(",")
                        );
                    }
                }
                CorpusAction::Print { name, i, k, set } => {
                    let formula = match name.as_str() {
                        "phi_ith" => corpus::phi_ith(i.unwrap_or(2)),
                        "psi_s" => {
                            let s = match set {
                                Some(ref text) => parse_usize_set(text)?,
                                None => BTreeSet::from([0]),
                            };
                            corpus::psi_s(k.unwrap_or(2), &s)?
                        }
                        "coin" => corpus::coin_formula(&corpus::phi_ith(i.unwrap_or(0)))?,
                        other => {
                            let entry = corpus::entries()
                                .into_iter()
                                .find(|e| e.name == other)
                                .ok_or_else(|| anyhow!("unknown corpus entry `{other}`"))?;
                            (entry.build_default)()
                        }
                    };
                    println!("{formula}");
                }
            }
            Ok(true)
        }
        Command::Eval {
            structure,
            formula,
            assign,
            set_cap,
        } => {
            let s = load_structure(&structure)?;
            let f = parse(&formula).map_err(|e| anyhow!("{e}"))?;
            let options = EvalOptions {
                set_quantifier_cap: set_cap,
                ..EvalOptions::default()
            };
            let asg = parse_assignment(assign.as_deref())?;
            let (free, _) = f.free_vars();
            let unbound: Vec<_> = free.iter().filter(|v| asg.get(v).is_none()).collect();
            if unbound.is_empty() {
                println!("{}", evaluate_with(&s, &f, &asg, options)?);
            } else {
                if !asg.vars().is_empty() {
                    bail!("bind all free variables or none; missing {unbound:?}");
                }
                for tuple in query_with(&s, &f, options)? {
                    let parts: Vec<String> = tuple.iter().map(|x| x.to_string()).collect();
                    println!("({})", parts.join(", "));
                }
            }
            Ok(true)
        }
        Command::Prob {
            structure,
            formula,
            rho,
            exact,
            mc,
            epsilon,
            delta,
            assign,
        } => {
            let space = RandomSpace::new(load_structure(&structure)?, parse_rho(&rho)?)?;
            let f = parse(&formula).map_err(|e| anyhow!("{e}"))?;
            let asg = parse_assignment(assign.as_deref())?;
            let estimate = if mc || (!exact && space.bit_budget() > cli.cap as u128) {
                mc_probability(&space, &f, &asg, epsilon, delta, cli.seed)?
            } else {
                exact_probability_capped(&space, &f, &asg, cli.cap)?
            };
            println!("{}", serde_json::to_string_pretty(&estimate)?);
            Ok(true)
        }
        Command::Gap {
            structure,
            formula,
            rho,
            alpha,
            beta,
            query,
            assign,
        } => {
            let space = RandomSpace::new(load_structure(&structure)?, parse_rho(&rho)?)?;
            let f = parse(&formula).map_err(|e| anyhow!("{e}"))?;
            let gap = GapSpec::new(parse_fraction(&alpha)?, parse_fraction(&beta)?)?;
            if query {
                let result = bp_query(&space, &f, &gap, mode)?;
                println!("{}", serde_json::to_string_pretty(&result)?);
            } else {
                let asg = parse_assignment(assign.as_deref())?;
                let outcomes = check_gap(&[(space, asg)], &f, &gap, mode)?;
                println!("{}", serde_json::to_string_pretty(&outcomes)?);
            }
            Ok(true)
        }
        Command::Amplify {
            formula,
            rho,
            n,
            l,
            plan,
        } => {
            let f = parse(&formula).map_err(|e| anyhow!("{e}"))?;
            let rho = parse_rho(&rho)?;
            let (n, l) = match (n, l, plan) {
                (Some(n), Some(l), None) => (n, l),
                (None, None, Some(plan)) => {
                    let parts: Vec<&str> = plan.split(',').collect();
                    if parts.len() != 4 {
                        bail!("--plan needs alpha,beta,alpha_target,beta_target");
                    }
                    let plan = amplification_plan(
                        &parse_fraction(parts[0])?,
                        &parse_fraction(parts[1])?,
                        &parse_fraction(parts[2])?,
                        &parse_fraction(parts[3])?,
                    )?;
                    eprintln!("plan: n={}, l={}", plan.0, plan.1);
                    plan
                }
                _ => bail!("pass either --n and --l, or --plan"),
            };
            let (amplified, vocab) = amplify(&f, &rho, n, l)?;
            let symbols: Vec<String> = vocab
                .iter()
                .map(|s| format!("{}/{}", s.name, s.arity))
                .collect();
            eprintln!("random vocabulary: {}", symbols.join(","));
            println!("{amplified}");
            Ok(true)
        }
        Command::Design { action } => {
            match action {
                DesignAction::Build { n, m, degree, out } => {
                    let design = PartialDesign::build(n, m, degree)?;
                    design.check()?;
                    let json = serde_json::to_string_pretty(&design)?;
                    match out {
                        Some(path) => fs::write(&path, json + "\n")?,
                        None => println!("{json}"),
                    }
                }
                DesignAction::Check { file } => {
                    let design: PartialDesign = serde_json::from_str(&fs::read_to_string(&file)?)?;
                    design.check()?;
                    println!(
                        "ok: {} sets of size {}, intersections within {}",
                        design.output_bits(),
                        design.field_size(),
                        design.degree_bound()
                    );
                }
                DesignAction::Suggest { n, depth } => {
                    let (m, degree) = suggest_prg_parameters(n, depth)?;
                    println!("{}", serde_json::json!({"m": m, "degree_bound": degree}));
                }
            }
            Ok(true)
        }
        Command::Prg { action } => {
            let PrgAction::Compare {
                structure,
                formula,
                rho,
                design,
                mode,
                epsilon,
                delta,
            } = action;
            let space = RandomSpace::new(load_structure(&structure)?, parse_rho(&rho)?)?;
            let f = parse(&formula).map_err(|e| anyhow!("{e}"))?;
            let design = match design {
                Some(path) => serde_json::from_str(&fs::read_to_string(&path)?)?,
                None => {
                    let bits = space.bit_budget() as usize;
                    let (m, degree) = suggest_prg_parameters(bits.max(2), 0)?;
                    PartialDesign::build(bits, m, degree)?
                }
            };
            let seed_mode = match mode {
                PrgSeedMode::Exact => SeedMode::ExactSeeds,
                PrgSeedMode::Mc => SeedMode::McSeeds {
                    epsilon,
                    delta,
                    seed: cli.seed,
                },
            };
            let truth = if space.bit_budget() <= cli.cap as u128 {
                Some(exact_probability_capped(
                    &space,
                    &f,
                    &Assignment::new(),
                    cli.cap,
                )?)
            } else {
                None
            };
            let generated = rlogic::derand::prg_probability(
                &space,
                &f,
                &Assignment::new(),
                &design,
                seed_mode,
            )?;
            let gap = truth
                .as_ref()
                .map(|t| (generated.value_f64() - t.value_f64()).abs());
            println!(
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({
                    "generator": generated,
                    "truth": truth,
                    "absolute_gap": gap,
                    "note": "informational: no closeness bound is asserted",
                }))?
            );
            Ok(true)
        }
        Command::Experiment { name } => {
            let opts = ExperimentOptions {
                samples: cli.samples,
                seed: cli.seed,
                slow: cli.tier == Tier::Slow,
            };
            let names: Vec<&str> = if name == "all" {
                experiment_names()
            } else {
                vec![name.as_str()]
            };
            let mut all_passed = true;
            for name in names {
                let report = run_experiment(name, &opts)?;
                all_passed &= report.passed();
                print_report(&report, cli.format)?;
            }
            Ok(all_passed)
        }
        Command::Cover {
            l,
            members,
            k,
            attempts,
        } => {
            let members: Vec<u64> = members
                .split(',')
                .filter(|p| !p.is_empty())
                .map(|p| Ok(p.trim().parse()?))
                .collect::<Result<_>>()?;
            let problem = CoverProblem::new(l, members)?;
            let outcome = cover_search(&problem, k, attempts, cli.seed);
            println!("{}", serde_json::to_string_pretty(&outcome)?);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
