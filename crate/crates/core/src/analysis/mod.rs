//! Static checks and the rewrites that prepare a program for evaluation:
//! safety, stratification, schema inference, normalization, predicate
//! classification and the P1..P4 component split.

mod components;
mod normalize;
mod schema;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use petgraph::graph::{DiGraph, NodeIndex};

use crate::frontend::{conj_vars, Goal, Literal, Program, Rule, RuleKind, Schema};

pub use components::{
    classify_predicates, mark_constrained, partition_components, Classification, ComponentPartition, Constrained,
};
pub use normalize::{normalize, Normalized};
pub use schema::infer_schemas;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub rule: Option<usize>,
    pub var: Option<String>,
    pub message: String,
    pub warning: bool,
}

impl Diagnostic {
    pub fn error(rule: Option<usize>, message: impl Into<String>) -> Diagnostic {
        Diagnostic { rule, var: None, message: message.into(), warning: false }
    }

    pub fn warning(message: impl Into<String>) -> Diagnostic {
        Diagnostic { rule: None, var: None, message: message.into(), warning: true }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = if self.warning { "warning" } else { "error" };
        match self.rule {
            Some(r) => write!(f, "{level}: rule {}: {}", r + 1, self.message),
            None => write!(f, "{level}: {}", self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("{}", join_diags(.0))]
    Diagnostics(Vec<Diagnostic>),
    #[error("unstratified negation through cycle {{{}}}", .0.join(", "))]
    Unstratified(Vec<String>),
    #[error("guess predicate `{0}` has more than one defining rule")]
    MultipleDefinition(String),
    #[error("body of the rule defining guess predicate `{pred}` depends on guess predicate `{guess}`")]
    GuessDependency { pred: String, guess: String },
}

fn join_diags(ds: &[Diagnostic]) -> String {
    ds.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n")
}

/// Predicate graph with edges from body predicates to head predicates.
#[derive(Debug, Clone, Default)]
pub struct DependencyGraph {
    pub nodes: Vec<String>,
    pub positive_edges: BTreeSet<(String, String)>,
    pub negative_edges: BTreeSet<(String, String)>,
}

impl DependencyGraph {
    pub fn build<'a>(rules: impl IntoIterator<Item = &'a Rule>) -> DependencyGraph {
        let mut g = DependencyGraph::default();
        let add = |g: &mut DependencyGraph, p: &str| {
            if !g.nodes.iter().any(|n| n == p) {
                g.nodes.push(p.to_string());
            }
        };
        for r in rules {
            for h in r.defined() {
                add(&mut g, h);
            }
            for l in r.body_literals() {
                if let Some(a) = l.atom() {
                    add(&mut g, &a.pred);
                    for h in r.defined() {
                        let e = (a.pred.clone(), h.to_string());
                        if matches!(l, Literal::Neg(_)) {
                            g.negative_edges.insert(e);
                        } else {
                            g.positive_edges.insert(e);
                        }
                    }
                }
            }
        }
        g
    }

    /// Strongly connected components in topological order (sources first).
    pub fn sccs(&self) -> Vec<Vec<String>> {
        let mut graph: DiGraph<String, ()> = DiGraph::new();
        let idx: BTreeMap<&str, NodeIndex> =
            self.nodes.iter().map(|n| (n.as_str(), graph.add_node(n.clone()))).collect();
        for (a, b) in self.positive_edges.iter().chain(&self.negative_edges) {
            graph.add_edge(idx[a.as_str()], idx[b.as_str()], ());
        }
        let mut out: Vec<Vec<String>> = petgraph::algo::tarjan_scc(&graph)
            .into_iter()
            .map(|c| {
                let mut names: Vec<String> = c.into_iter().map(|i| graph[i].clone()).collect();
                names.sort();
                names
            })
            .collect();
        out.reverse();
        out
    }
}

/// Declaration and arity checks against the schema.
pub fn validate(p: &Program, schema: &Schema) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let idb = p.idb();
    let mut arity: BTreeMap<String, usize> = BTreeMap::new();
    for pred in &idb {
        if schema.is_edb(pred) {
            out.push(Diagnostic::error(None, format!("`{pred}` is a database predicate and cannot be defined")));
        }
    }
    let mut check = |out: &mut Vec<Diagnostic>, ri: Option<usize>, pred: &str, n: usize| {
        if let Some(sig) = schema.signature(pred).filter(|_| schema.is_edb(pred)) {
            if sig.len() != n {
                out.push(Diagnostic::error(ri, format!("`{pred}` expects {} arguments, got {n}", sig.len())));
            }
            return;
        }
        if !idb.iter().any(|q| q == pred) {
            out.push(Diagnostic::error(ri, format!("undeclared predicate `{pred}`")));
            return;
        }
        match arity.get(pred) {
            Some(&m) if m != n => out.push(Diagnostic::error(ri, format!("`{pred}` used with {m} and {n} arguments"))),
            _ => {
                arity.insert(pred.to_string(), n);
            }
        }
    };
    for (i, r) in p.rules.iter().enumerate() {
        for h in &r.head {
            check(&mut out, Some(i), &h.pred, h.args.len());
        }
        for l in r.body_literals() {
            if let Some(a) = l.atom() {
                check(&mut out, Some(i), &a.pred, a.args.len());
            }
        }
        if r.kind == RuleKind::GeneralizedPartition {
            if let Some(Literal::Pos(d)) = r.conj().last() {
                if !schema.is_domain(&d.pred) {
                    out.push(Diagnostic::error(Some(i), format!("`{}` is not a domain", d.pred)));
                }
            }
        }
    }
    if let Some(g) = &p.goal {
        if !idb.contains(&g.atom.pred) {
            out.push(Diagnostic::error(None, format!("goal predicate `{}` is not defined", g.atom.pred)));
        } else {
            check(&mut out, None, &g.atom.pred, g.atom.args.len());
        }
    }
    out
}

/// Every head, negative-literal and comparison variable must occur in a
/// positive literal of the same conjunct. Comparisons never bind.
pub fn check_safety(p: &Program) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (i, r) in p.rules.iter().enumerate() {
        for conj in &r.body {
            let mut bound = Vec::new();
            for l in conj {
                if let Literal::Pos(a) = l {
                    a.vars(&mut bound);
                }
            }
            let mut need = Vec::new();
            for h in &r.head {
                h.vars(&mut need);
            }
            for l in conj {
                if !matches!(l, Literal::Pos(_)) {
                    l.vars(&mut need);
                }
            }
            let mut reported = BTreeSet::new();
            for v in need {
                if !bound.contains(&v) && reported.insert(v.clone()) {
                    out.push(Diagnostic {
                        rule: Some(i),
                        message: format!("unsafe variable `{v}`"),
                        var: Some(v),
                        warning: false,
                    });
                }
            }
        }
    }
    out
}

/// Orders the standard rules into strata. Predicates without a standard
/// rule in `rules` count as base.
pub fn stratify(rules: &[Rule]) -> Result<Vec<Vec<Rule>>, AnalysisError> {
    let std: Vec<&Rule> = rules.iter().filter(|r| r.kind == RuleKind::Standard).collect();
    let defined: BTreeSet<&str> = std.iter().flat_map(|r| r.defined()).collect();
    let mut g = DependencyGraph::build(std.iter().copied());
    g.nodes.retain(|n| defined.contains(n.as_str()));
    g.positive_edges.retain(|(a, _)| defined.contains(a.as_str()));
    g.negative_edges.retain(|(a, _)| defined.contains(a.as_str()));
    let sccs = g.sccs();
    let mut level: BTreeMap<String, usize> = BTreeMap::new();
    for scc in &sccs {
        let members: BTreeSet<&str> = scc.iter().map(|s| s.as_str()).collect();
        if g.negative_edges.iter().any(|(a, b)| members.contains(a.as_str()) && members.contains(b.as_str())) {
            return Err(AnalysisError::Unstratified(scc.clone()));
        }
        let mut lv = 0;
        for (a, b) in &g.positive_edges {
            if members.contains(b.as_str()) && !members.contains(a.as_str()) {
                lv = lv.max(level[a]);
            }
        }
        for (a, b) in &g.negative_edges {
            if members.contains(b.as_str()) {
                lv = lv.max(level[a] + 1);
            }
        }
        for m in scc {
            level.insert(m.clone(), lv);
        }
    }
    let top = level.values().copied().max().map(|m| m + 1).unwrap_or(0);
    let mut strata: Vec<Vec<Rule>> = vec![Vec::new(); top];
    for r in std {
        strata[level[&r.head[0].pred]].push(r.clone());
    }
    strata.retain(|s| !s.is_empty());
    Ok(strata)
}

/// Direct dependencies: defined predicate -> predicates in its bodies.
pub(crate) fn direct_deps<'a>(rules: impl IntoIterator<Item = &'a Rule>) -> BTreeMap<String, BTreeSet<String>> {
    let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for r in rules {
        for h in r.defined() {
            let e = out.entry(h.to_string()).or_default();
            for l in r.body_literals() {
                if let Some(a) = l.atom() {
                    e.insert(a.pred.clone());
                }
            }
        }
    }
    out
}

/// Everything reachable from `p` through `deps` (excluding `p` unless cyclic).
pub(crate) fn reachable(deps: &BTreeMap<String, BTreeSet<String>>, p: &str) -> BTreeSet<String> {
    let mut seen = BTreeSet::new();
    let mut stack: Vec<&str> = deps.get(p).map(|s| s.iter().map(|x| x.as_str()).collect()).unwrap_or_default();
    while let Some(q) = stack.pop() {
        if seen.insert(q.to_string()) {
            if let Some(next) = deps.get(q) {
                stack.extend(next.iter().map(|x| x.as_str()));
            }
        }
    }
    seen
}

/// Result of the full static pipeline over one query.
#[derive(Debug, Clone)]
pub struct Analyzed {
    pub schema: Schema,
    pub program: Program,
    pub classification: Classification,
    pub constrained: Constrained,
    pub partition: ComponentPartition,
    pub warnings: Vec<Diagnostic>,
}

/// validate, safety, stratification, inference, normalization,
/// classification, component split.
pub fn analyze(schema: &Schema, program: &Program) -> Result<Analyzed, AnalysisError> {
    let mut diags = validate(program, schema);
    diags.extend(check_safety(program));
    if !diags.is_empty() {
        return Err(AnalysisError::Diagnostics(diags));
    }
    stratify(&program.rules)?;
    classify_predicates(program)?;
    let (inferred, warnings) = infer_schemas(program, schema)?;
    let Normalized { program, schema } = normalize(program, &inferred);
    let classification = classify_predicates(&program)?;
    let constrained = mark_constrained(&program);
    let partition = partition_components(&program)?;
    Ok(Analyzed { schema, program, classification, constrained, partition, warnings })
}

/// Variables of a rule head and conjunct, head first.
pub(crate) fn rule_vars(r: &Rule, conj: &[Literal]) -> Vec<String> {
    let mut out = Vec::new();
    for h in &r.head {
        h.vars(&mut out);
    }
    for v in conj_vars(conj) {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

/// Picks `base`, `base1`, `base2`, ... avoiding `used`; records the choice.
pub(crate) fn fresh_var(base: &str, used: &mut BTreeSet<String>) -> String {
    if !used.contains(base) {
        used.insert(base.to_string());
        return base.to_string();
    }
    let mut k = 1;
    loop {
        let cand = format!("{base}{k}");
        if !used.contains(&cand) {
            used.insert(cand.clone());
            return cand;
        }
        k += 1;
    }
}

/// A goal's predicate, if any. Plain goals count too, so that their
/// rules reach the solver.
pub(crate) fn goal_pred(g: Option<&Goal>) -> Option<&str> {
    g.map(|g| g.atom.pred.as_str())
}
