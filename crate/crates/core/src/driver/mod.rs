//! End-to-end query evaluation: fixpoint of P1, constraint solving of P2,
//! checking of P3 candidates, then P4 when the goal lives there.

mod gen;

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use crate::analysis::{self, AnalysisError, Analyzed, ComponentPartition};
use crate::fixpoint::{self, Interpretation};
use crate::frontend::{Database, FrontendError, GoalMode, Query, Rule, Schema};
use crate::optimizer::{self, Pass};
use crate::oracle::{self, Answer};
use crate::solver::{self, GroundModel, Limits, Mode, SolveError};
use crate::transpile::{self, ConstraintModel, TranspileError};

pub use gen::{gen_instance, Family, GenParams, Instance};

#[derive(Debug, thiserror::Error)]
pub enum DriverError {
    #[error("{0}")]
    Frontend(#[from] FrontendError),
    #[error("{0}")]
    Analysis(#[from] AnalysisError),
    #[error("{0}")]
    Transpile(#[from] TranspileError),
    #[error("{0}")]
    Solve(#[from] SolveError),
    #[error("invalid generator parameters: {0}")]
    Gen(String),
}

impl DriverError {
    /// Process exit code: 2 for diagnostics, 3 for resource limits.
    pub fn exit_code(&self) -> i32 {
        match self {
            DriverError::Solve(SolveError::ResourceLimit(_)) => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Options {
    pub mode: Mode,
    pub passes: Vec<Pass>,
    pub limits: Limits,
    /// Upper bound on P2 candidates tried against P3; `None` is exhaustive.
    pub candidate_cap: Option<usize>,
}

impl Default for Options {
    fn default() -> Options {
        Options {
            mode: Mode::First,
            passes: optimizer::PIPELINE.to_vec(),
            limits: Limits::default(),
            candidate_cap: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stats {
    pub m1_atoms: usize,
    pub m2_atoms: usize,
    pub m3_atoms: usize,
    /// P2 candidates examined by the P3 check.
    pub iterations: usize,
    /// Requests for a P2 solution.
    pub solver_calls: usize,
    pub nodes: u64,
    pub p4_evaluated: bool,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    /// Distinct goal projections in discovery order; empty means no
    /// stable model exists (or none within the candidate cap).
    pub answers: Vec<Answer>,
    /// Goal cardinality for Min/Max queries.
    pub optimum: Option<usize>,
    pub stats: Stats,
    pub model: Option<ConstraintModel>,
}

impl Outcome {
    pub fn is_no_solution(&self) -> bool {
        self.answers.is_empty()
    }
}

/// Symbols defined by a rule set.
fn defined(rules: &[Rule]) -> BTreeSet<String> {
    rules.iter().flat_map(|r| r.defined()).map(String::from).collect()
}

fn derived_atoms(m: &Interpretation, preds: &BTreeSet<String>) -> usize {
    m.iter().filter(|(p, _)| preds.contains(*p)).map(|(_, ts)| ts.len()).sum()
}

struct Pipeline<'a> {
    an: &'a Analyzed,
    goal: &'a crate::frontend::Goal,
    m1: Interpretation,
    stats: Stats,
}

impl<'a> Pipeline<'a> {
    fn part(&self) -> &'a ComponentPartition {
        &self.an.partition
    }

    /// Steps 3 and 4 over one P2 candidate; `None` when P3 rejects it.
    fn finish(&mut self, m2: &Interpretation) -> Option<Interpretation> {
        let mut m = self.m1.clone();
        fixpoint::merge(&mut m, m2);
        let part = self.part();
        if !part.p3_is_empty() {
            let p3: BTreeSet<String> = defined(&part.p3_s);
            let m3 = fixpoint::evaluate_stratified(&part.p3_s, &m).ok()?;
            let n = derived_atoms(&m3, &p3);
            if !part.p3_c.iter().all(|c| fixpoint::constraint_holds(c, &m3)) {
                return None;
            }
            self.stats.m3_atoms = n;
            m = m3;
        }
        if defined(&part.p4).contains(&self.goal.atom.pred) {
            self.stats.p4_evaluated = true;
            m = fixpoint::evaluate_stratified(&part.p4, &m).ok()?;
        }
        Some(m)
    }
}

fn push_answer(out: &mut Vec<Answer>, a: Answer) {
    if !out.contains(&a) {
        out.push(a);
    }
}

/// Constraint model of the P2 component after the given passes.
pub fn build_model(an: &Analyzed, passes: &[Pass]) -> Result<ConstraintModel, DriverError> {
    let m = transpile::assemble_model(&an.program, &an.partition, &an.schema)?;
    Ok(optimizer::optimize(&m, &an.program, passes))
}

/// Database with the extents of derived domains filled in.
pub fn prepare_database(an: &Analyzed, db: &Database) -> Database {
    db.with_derived(&an.schema)
}

pub fn run_query(schema: &Schema, query: &Query, db: &Database, opts: &Options) -> Result<Outcome, DriverError> {
    let an = analysis::analyze(schema, &query.program)?;
    run_analyzed(&an, db, opts)
}

pub fn run_analyzed(an: &Analyzed, db: &Database, opts: &Options) -> Result<Outcome, DriverError> {
    let goal = an.program.goal.as_ref().ok_or(FrontendError::MissingQuery)?;
    let db = prepare_database(an, db);
    let base = fixpoint::from_database(&db);
    let part = &an.partition;
    let m1 = fixpoint::evaluate_stratified(&part.p1, &base)?;
    let mut pipe = Pipeline { an, goal, m1, stats: Stats::default() };
    pipe.stats.m1_atoms = derived_atoms(&pipe.m1, &defined(&part.p1));
    let optimizing = goal.mode != GoalMode::Plain;

    if part.p2_is_empty() {
        if optimizing {
            return Err(TranspileError::GoalOutsideP2(goal.atom.pred.clone()).into());
        }
        let answers = match pipe.finish(&Interpretation::new()) {
            Some(m) => vec![oracle::project(&m, &goal.atom)],
            None => Vec::new(),
        };
        return Ok(Outcome { answers, optimum: None, stats: pipe.stats, model: None });
    }

    let model = build_model(an, &opts.passes)?;
    let g = solver::ground(&model, &db, &pipe.m1)?;
    let p2 = defined(&part.p2_g).union(&defined(&part.p2_s)).cloned().collect::<BTreeSet<_>>();

    let mut answers = Vec::new();
    let mut optimum = None;
    if part.p3_is_empty() {
        let mode = match (opts.mode, optimizing) {
            (Mode::All | Mode::AllOptimal, true) => Mode::AllOptimal,
            (_, true) => Mode::Optimize,
            (Mode::Optimize, false) => Mode::First,
            (Mode::AllOptimal, false) => Mode::All,
            (m, false) => m,
        };
        pipe.stats.solver_calls = 1;
        let (sols, st) = solver::solve_with_stats(&g, mode, opts.limits)?;
        pipe.stats.nodes = st.nodes;
        for s in &sols {
            let m2 = solver::decode(&g, s);
            pipe.stats.m2_atoms = derived_atoms(&m2, &p2);
            pipe.stats.iterations += 1;
            if let Some(m) = pipe.finish(&m2) {
                push_answer(&mut answers, oracle::project(&m, &goal.atom));
            }
        }
    } else {
        let all = opts.mode == Mode::All || opts.mode == Mode::AllOptimal;
        let mut best: Option<usize> = None;
        let mut cands = 0usize;
        let st = candidates(&g, opts, &mut |s| {
            cands += 1;
            pipe.stats.solver_calls += 1;
            pipe.stats.iterations += 1;
            let m2 = solver::decode(&g, s);
            pipe.stats.m2_atoms = derived_atoms(&m2, &p2);
            if let Some(m) = pipe.finish(&m2) {
                let a = oracle::project(&m, &goal.atom);
                if optimizing {
                    let better = match (best, goal.mode) {
                        (None, _) => true,
                        (Some(b), GoalMode::Min) => a.len() < b,
                        (Some(b), _) => a.len() > b,
                    };
                    if better {
                        best = Some(a.len());
                        answers.clear();
                    }
                    if best == Some(a.len()) && (all || answers.is_empty()) {
                        push_answer(&mut answers, a);
                    }
                } else {
                    push_answer(&mut answers, a);
                    if !all {
                        return ControlFlow::Break(());
                    }
                }
            }
            if opts.candidate_cap.is_some_and(|cap| cands >= cap) {
                return ControlFlow::Break(());
            }
            ControlFlow::Continue(())
        })?;
        pipe.stats.nodes = st;
    }
    if optimizing {
        optimum = answers.first().map(|a| a.len());
    }
    Ok(Outcome { answers, optimum, stats: pipe.stats, model: Some(model) })
}

/// Lazy enumeration of P2 solutions in solver order.
fn candidates(
    g: &GroundModel,
    opts: &Options,
    f: &mut dyn FnMut(&solver::Solution) -> ControlFlow<()>,
) -> Result<u64, DriverError> {
    Ok(solver::solve_each(g, opts.limits, f)?.nodes)
}

/// Facts of an answer, sorted, one per line.
pub fn format_answer(pred: &str, a: &Answer) -> String {
    let mut out = String::new();
    for t in a {
        out.push_str(pred);
        if !t.is_empty() {
            let args: Vec<String> = t.iter().map(|v| v.to_string()).collect();
            out.push('(');
            out.push_str(&args.join(","));
            out.push(')');
        }
        out.push_str(".\n");
    }
    out
}

/// The printed result of `npdl solve`.
pub fn format_outcome(pred: &str, o: &Outcome) -> String {
    if o.is_no_solution() {
        return "% no solution\n".to_string();
    }
    let mut out = String::new();
    if let Some(k) = o.optimum {
        out.push_str(&format!("% optimum {k}\n"));
    }
    for (i, a) in o.answers.iter().enumerate() {
        out.push_str(&format!("% answer {}\n", i + 1));
        out.push_str(&format_answer(pred, a));
    }
    out
}

pub fn format_stats(s: &Stats) -> String {
    format!(
        "% M1 {} atoms, M2 {} atoms, M3 {} atoms, {} iterations, {} solver calls, {} nodes\n",
        s.m1_atoms, s.m2_atoms, s.m3_atoms, s.iterations, s.solver_calls, s.nodes
    )
}
