//! Grounding of constraint models and an exhaustive backtracking search
//! with forward checking and branch and bound.

mod ground;
mod search;

use std::ops::ControlFlow;
use std::str::FromStr;
use std::time::Duration;

use crate::fixpoint::Interpretation;
use crate::frontend::Atom;
use crate::optimizer::decode_value as code_value;
use crate::transpile::{ConstraintKind, Sense};

pub use ground::{ground, ArrayInfo, Cell, GTerm, GroundConstraint, GroundModel};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error("undefined domain or relation `{0}`")]
    UndefinedDomain(String),
    #[error("empty or oversized integer range: {0}")]
    EmptyRange(String),
    #[error("unsupported model construct: {0}")]
    Unsupported(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
}

pub const DEFAULT_NODE_LIMIT: u64 = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub node_limit: u64,
    pub time_limit: Option<Duration>,
}

impl Default for Limits {
    fn default() -> Limits {
        Limits { node_limit: DEFAULT_NODE_LIMIT, time_limit: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    /// Value of every cell, in cell order.
    pub values: Vec<i64>,
    pub objective: Option<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    First,
    All,
    /// One proven optimum.
    Optimize,
    /// Every solution attaining the optimum.
    AllOptimal,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Mode, String> {
        match s {
            "first" => Ok(Mode::First),
            "all" => Ok(Mode::All),
            "opt" => Ok(Mode::Optimize),
            "all-opt" => Ok(Mode::AllOptimal),
            other => Err(format!("unknown mode `{other}` (expected first, all, opt, all-opt)")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub nodes: u64,
}

/// Every solution in search order, ignoring the objective; the callback
/// stops the enumeration by returning `Break`.
pub fn solve_each(
    g: &GroundModel,
    limits: Limits,
    f: &mut dyn FnMut(&Solution) -> ControlFlow<()>,
) -> Result<SolveStats, SolveError> {
    let mut s = search::Search::new(g, limits, Vec::new())?;
    s.each(f)?;
    Ok(SolveStats { nodes: s.nodes })
}

/// Optimal solution by branch and bound, `None` when unsatisfiable.
pub fn solve_optimal(g: &GroundModel, limits: Limits) -> Result<(Option<Solution>, SolveStats), SolveError> {
    let Some((sense, _)) = &g.objective else {
        let mut first = None;
        let stats = solve_each(g, limits, &mut |s| {
            first = Some(s.clone());
            ControlFlow::Break(())
        })?;
        return Ok((first, stats));
    };
    let mut s = search::Search::new(g, limits, Vec::new())?;
    let best = s.best(*sense)?;
    Ok((best, SolveStats { nodes: s.nodes }))
}

pub fn solve(g: &GroundModel, mode: Mode, limits: Limits) -> Result<Vec<Solution>, SolveError> {
    Ok(solve_with_stats(g, mode, limits)?.0)
}

pub fn solve_with_stats(
    g: &GroundModel,
    mode: Mode,
    limits: Limits,
) -> Result<(Vec<Solution>, SolveStats), SolveError> {
    match mode {
        Mode::First => {
            let mut out = Vec::new();
            let stats = solve_each(g, limits, &mut |s| {
                out.push(s.clone());
                ControlFlow::Break(())
            })?;
            Ok((out, stats))
        }
        Mode::All => {
            let mut out = Vec::new();
            let stats = solve_each(g, limits, &mut |s| {
                out.push(s.clone());
                ControlFlow::Continue(())
            })?;
            Ok((out, stats))
        }
        Mode::Optimize => {
            let (best, stats) = solve_optimal(g, limits)?;
            Ok((best.into_iter().collect(), stats))
        }
        Mode::AllOptimal => {
            let (best, stats) = solve_optimal(g, limits)?;
            let (Some(best), Some((_, obj))) = (best, &g.objective) else {
                return solve_with_stats(g, Mode::All, limits);
            };
            let Some(value) = best.objective else { return Ok((vec![best], stats)) };
            let mut cells = Vec::new();
            obj.cells(&mut cells);
            let pin = GroundConstraint {
                kind: ConstraintKind::Implies,
                lhs: GTerm::Const(1),
                rhs: GTerm::Cmp(crate::frontend::CmpOp::Eq, Box::new(obj.clone()), Box::new(GTerm::Const(value))),
                cells,
            };
            let mut s = search::Search::new(g, limits, vec![pin])?;
            let mut out = Vec::new();
            s.each(&mut |sol| {
                out.push(sol.clone());
                ControlFlow::Continue(())
            })?;
            Ok((out, SolveStats { nodes: stats.nodes + s.nodes }))
        }
    }
}

/// Decision arrays of a solution as ground atoms, with reduced integer
/// arrays turned back into their boolean form.
pub fn decode(g: &GroundModel, s: &Solution) -> Interpretation {
    let mut out = Interpretation::new();
    for info in g.arrays.keys() {
        out.entry(info.clone()).or_default();
    }
    for (cell, &v) in g.cells.iter().zip(&s.values) {
        let info = &g.arrays[&cell.array];
        let mut tuple = Vec::with_capacity(cell.key.len() + 1);
        let mut ok = true;
        for (dim, k) in info.index.iter().zip(&cell.key) {
            match g.codes.get(dim) {
                Some(ext) => match k.as_int().and_then(|c| code_value(ext, c)) {
                    Some(x) => tuple.push(x.clone()),
                    None => ok = false,
                },
                None => tuple.push(k.clone()),
            }
        }
        if !ok {
            continue;
        }
        match &info.range {
            None if v == 1 => {}
            None => continue,
            Some(r) => match g.codes.get(r).and_then(|ext| code_value(ext, v)) {
                Some(x) => tuple.push(x.clone()),
                None => continue,
            },
        }
        out.entry(cell.array.clone()).or_default().insert(tuple);
    }
    out
}

/// Goal tuples of a decoded solution.
pub fn extract_answer(m: &Interpretation, goal: &Atom) -> crate::oracle::Answer {
    crate::oracle::project(m, goal)
}

pub fn sense_name(s: Sense) -> &'static str {
    match s {
        Sense::Minimize => "minimize",
        Sense::Maximize => "maximize",
    }
}
