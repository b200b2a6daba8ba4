use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use npdl::analysis::{self, Analyzed};
use npdl::driver::{self, DriverError, Family, GenParams, Options};
use npdl::fixpoint;
use npdl::frontend::{self, Database, Program, Query, Schema};
use npdl::optimizer::{self, Pass};
use npdl::oracle;
use npdl::solver::{Limits, Mode, DEFAULT_NODE_LIMIT};
use npdl::transpile;

#[derive(Parser)]
#[command(name = "npdl", version, about = "Evaluate NP Datalog queries by fixpoint evaluation and constraint search")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Answer a query over a database.
    Solve {
        schema: PathBuf,
        program: PathBuf,
        facts: PathBuf,
        /// first, all, opt, all-opt
        #[arg(long, default_value = "first")]
        mode: Mode,
        /// Optimizer passes: all, none, or a comma list of rr, cs, ar, vd.
        #[arg(long, default_value = "all")]
        opt: String,
        /// Also write the constraint model with its data as OPL text.
        #[arg(long, value_name = "FILE")]
        emit_opl: Option<PathBuf>,
        /// Print model sizes and iteration counts to stderr.
        #[arg(long)]
        trace: bool,
        #[arg(long, default_value_t = DEFAULT_NODE_LIMIT)]
        node_limit: u64,
        /// Wall-clock cap in seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        /// Most P2 candidates to test against P3.
        #[arg(long)]
        candidate_cap: Option<usize>,
    },
    /// Parse and analyze a program; print the component partition.
    Check { schema: PathBuf, program: PathBuf },
    /// Least model of a program without guesses.
    Eval { schema: PathBuf, program: PathBuf, facts: PathBuf },
    /// Print a generated graph database.
    Gen {
        family: FamilyArg,
        n: usize,
        /// Edge probability for random-gnp.
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long)]
        seed: Option<u64>,
        /// Add `color` facts c1..ck.
        #[arg(long, default_value_t = 0)]
        colors: usize,
    },
    /// Print generated code.
    Emit {
        target: Target,
        schema: PathBuf,
        program: PathBuf,
        /// Facts to include in the OPL data section.
        facts: Option<PathBuf>,
        #[arg(long, default_value = "all")]
        opt: String,
    },
    /// Answer set by stable-model enumeration (slow, small inputs only).
    #[command(hide = true)]
    Oracle {
        schema: PathBuf,
        program: PathBuf,
        facts: PathBuf,
        #[arg(long, default_value_t = oracle::DEFAULT_BOUND)]
        bound: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Chain,
    Cycle,
    Complete,
    GridLadder,
    RandomGnp,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::Chain => Family::Chain,
            FamilyArg::Cycle => Family::Cycle,
            FamilyArg::Complete => Family::Complete,
            FamilyArg::GridLadder => Family::GridLadder,
            FamilyArg::RandomGnp => Family::RandomGnp,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    /// Constraint model with data.
    Opl,
    /// Fixpoint script for the P1 rules.
    Fixp,
}

/// Failure with its exit code.
struct Fail(i32, String);

impl From<DriverError> for Fail {
    fn from(e: DriverError) -> Fail {
        Fail(e.exit_code(), e.to_string())
    }
}

impl From<frontend::FrontendError> for Fail {
    fn from(e: frontend::FrontendError) -> Fail {
        Fail(2, e.to_string())
    }
}

impl From<analysis::AnalysisError> for Fail {
    fn from(e: analysis::AnalysisError) -> Fail {
        Fail(2, e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Fail> {
    std::fs::read_to_string(path).map_err(|e| Fail(2, format!("{}: {e}", path.display())))
}

fn load_schema(path: &Path) -> Result<Schema, Fail> {
    frontend::parse_schema(&read(path)?).map_err(|e| Fail(2, format!("{}: {e}", path.display())))
}

fn load_query(path: &Path) -> Result<Query, Fail> {
    frontend::parse_query(&read(path)?).map_err(|e| Fail(2, format!("{}: {e}", path.display())))
}

fn load_program(path: &Path) -> Result<Program, Fail> {
    frontend::parse_program(&read(path)?).map_err(|e| Fail(2, format!("{}: {e}", path.display())))
}

fn load_facts(path: &Path, schema: &Schema) -> Result<Database, Fail> {
    frontend::parse_database(&read(path)?, schema).map_err(|e| Fail(2, format!("{}: {e}", path.display())))
}

fn passes(spec: &str) -> Result<Vec<Pass>, Fail> {
    optimizer::parse_opt(spec).map_err(|e| Fail(2, e))
}

fn analyze(schema: &Schema, program: &Program) -> Result<Analyzed, Fail> {
    let an = analysis::analyze(schema, program)?;
    for w in &an.warnings {
        eprintln!("{w}");
    }
    Ok(an)
}

/// OPL text of the P2 model over `db`.
fn opl_text(an: &Analyzed, db: &Database, passes: &[Pass]) -> Result<String, Fail> {
    let model = driver::build_model(an, passes)?;
    let full = driver::prepare_database(an, db);
    let known = fixpoint::evaluate_stratified(&an.partition.p1, &fixpoint::from_database(&full))?;
    Ok(transpile::emit_opl(&model, &an.schema, db, &known))
}

fn run(cli: Cli) -> Result<i32, Fail> {
    match cli.cmd {
        Cmd::Solve { schema, program, facts, mode, opt, emit_opl, trace, node_limit, time_limit, candidate_cap } => {
            let s = load_schema(&schema)?;
            let q = load_query(&program)?;
            let db = load_facts(&facts, &s)?;
            let an = analyze(&s, &q.program)?;
            let passes = passes(&opt)?;
            if let Some(out) = emit_opl {
                let text = opl_text(&an, &db, &passes)?;
                std::fs::write(&out, text).map_err(|e| Fail(2, format!("{}: {e}", out.display())))?;
            }
            let limits = Limits { node_limit, time_limit: time_limit.map(Duration::from_secs_f64) };
            let opts = Options { mode, passes, limits, candidate_cap };
            let outcome = driver::run_analyzed(&an, &db, &opts)?;
            if trace {
                eprint!("{}", driver::format_stats(&outcome.stats));
            }
            print!("{}", driver::format_outcome(&q.goal.atom.pred, &outcome));
            Ok(if outcome.is_no_solution() { 1 } else { 0 })
        }
        Cmd::Check { schema, program } => {
            let s = load_schema(&schema)?;
            let p = load_program(&program)?;
            let an = analyze(&s, &p)?;
            for (name, rules) in an.partition.sets() {
                println!("{name}:");
                for r in rules {
                    println!("  {}", frontend::print_rule(r));
                }
            }
            Ok(0)
        }
        Cmd::Eval { schema, program, facts } => {
            let s = load_schema(&schema)?;
            let p = load_program(&program)?;
            let db = load_facts(&facts, &s)?;
            let an = analyze(&s, &p)?;
            if !an.partition.p2_is_empty() {
                return Err(Fail(2, "eval needs a program without guess rules or constraints".into()));
            }
            let full = driver::prepare_database(&an, &db);
            let m = fixpoint::evaluate_stratified(&an.program.rules, &fixpoint::from_database(&full))?;
            for pred in an.program.idb() {
                if let Some(ts) = m.get(&pred) {
                    print!("{}", driver::format_answer(&pred, ts));
                }
            }
            Ok(0)
        }
        Cmd::Gen { family, n, p, seed, colors } => {
            let inst = driver::gen_instance(family.into(), &GenParams { n, p, seed, colors })?;
            print!("{}", inst.facts());
            Ok(0)
        }
        Cmd::Emit { target, schema, program, facts, opt } => {
            let s = load_schema(&schema)?;
            let p = load_program(&program)?;
            let an = analyze(&s, &p)?;
            match target {
                Target::Opl => {
                    let db = match facts {
                        Some(f) => load_facts(&f, &s)?,
                        None => Database::default(),
                    };
                    print!("{}", opl_text(&an, &db, &passes(&opt)?)?);
                }
                Target::Fixp => print!("{}", transpile::emit_fixp_script(&an.partition.p1, &an.schema)?),
            }
            Ok(0)
        }
        Cmd::Oracle { schema, program, facts, bound } => {
            let s = load_schema(&schema)?;
            let q = load_query(&program)?;
            let db = load_facts(&facts, &s)?;
            let an = analyze(&s, &q.program)?;
            let full = driver::prepare_database(&an, &db);
            let answers = oracle::oracle_answer(&an.program, &full, bound).map_err(|e| Fail(2, e.to_string()))?;
            if answers.is_empty() {
                println!("% no solution");
                return Ok(1);
            }
            for (i, a) in answers.iter().enumerate() {
                println!("% answer {}", i + 1);
                print!("{}", driver::format_answer(&q.goal.atom.pred, a));
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(Fail(code, msg)) => {
            eprintln!("npdl: {msg}");
            ExitCode::from(code as u8)
        }
    }
}
