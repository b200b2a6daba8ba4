use std::collections::{BTreeMap, BTreeSet};

use super::OracleError;
use crate::analysis::DependencyGraph;
use crate::fixpoint::{self, Binding, Interpretation};
use crate::frontend::{Atom, Database, Literal, Rule, Term, Tuple};

type GroundAtom = (String, Tuple);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct GroundRule {
    head: Option<usize>,
    pos: Vec<usize>,
    neg: Vec<usize>,
}

/// Ground instances over the atoms that could possibly be derived. Database
/// atoms are folded away: positive ones are dropped, rules negating one are
/// dropped.
#[derive(Debug, Clone)]
pub struct GroundProgram {
    pub atoms: Vec<(String, Tuple)>,
    index: BTreeMap<(String, Tuple), usize>,
    rules: Vec<GroundRule>,
    watch: Vec<Vec<usize>>,
    base: Interpretation,
}

fn ground_atom(a: &Atom, b: &Binding) -> Tuple {
    a.args
        .iter()
        .map(|t| match t {
            Term::Var(v) => b[v].clone(),
            Term::Const(c) => c.clone(),
        })
        .collect()
}

fn positive_part(conj: &[Literal]) -> Vec<Literal> {
    conj.iter().filter(|l| !matches!(l, Literal::Neg(_))).cloned().collect()
}

pub fn ground(rules: &[Rule], db: &Database) -> GroundProgram {
    let base = db.atoms();
    let mut possible = base.clone();
    loop {
        let mut fresh = Interpretation::new();
        for r in rules {
            let Some(h) = r.head.first() else { continue };
            for conj in &r.body {
                let pos = positive_part(conj);
                let mut b = Binding::new();
                fixpoint::solve_conj(&pos, &possible, &mut b, &mut |b| {
                    fresh.entry(h.pred.clone()).or_default().insert(ground_atom(h, b));
                });
            }
        }
        if !fixpoint::merge(&mut possible, &fresh) {
            break;
        }
    }

    let mut g = GroundProgram {
        atoms: Vec::new(),
        index: BTreeMap::new(),
        rules: Vec::new(),
        watch: Vec::new(),
        base: base.clone(),
    };
    let mut seen: BTreeSet<GroundRule> = BTreeSet::new();
    for r in rules {
        for conj in &r.body {
            let pos = positive_part(conj);
            let mut instances: Vec<GroundRule> = Vec::new();
            let mut b = Binding::new();
            let ids = |g: &mut GroundProgram, p: &str, t: Tuple| g.intern(p, t);
            let mut collected: Vec<(Option<GroundAtom>, Vec<GroundAtom>, Vec<GroundAtom>)> = Vec::new();
            fixpoint::solve_conj(&pos, &possible, &mut b, &mut |b| {
                let head = r.head.first().map(|h| (h.pred.clone(), ground_atom(h, b)));
                let mut p = Vec::new();
                let mut n = Vec::new();
                for l in conj {
                    match l {
                        Literal::Pos(a) => p.push((a.pred.clone(), ground_atom(a, b))),
                        Literal::Neg(a) => n.push((a.pred.clone(), ground_atom(a, b))),
                        Literal::Cmp(..) => {}
                    }
                }
                collected.push((head, p, n));
            });
            'inst: for (head, p, n) in collected {
                let mut gr = GroundRule { head: None, pos: Vec::new(), neg: Vec::new() };
                for (pred, t) in p {
                    if !fixpoint::contains(&base, &pred, &t) {
                        gr.pos.push(ids(&mut g, &pred, t));
                    }
                }
                for (pred, t) in n {
                    if fixpoint::contains(&base, &pred, &t) {
                        continue 'inst;
                    }
                    if fixpoint::contains(&possible, &pred, &t) {
                        gr.neg.push(ids(&mut g, &pred, t));
                    }
                }
                gr.head = head.map(|(pred, t)| ids(&mut g, &pred, t));
                gr.pos.sort_unstable();
                gr.pos.dedup();
                gr.neg.sort_unstable();
                gr.neg.dedup();
                instances.push(gr);
            }
            for gr in instances {
                if seen.insert(gr.clone()) {
                    g.rules.push(gr);
                }
            }
        }
    }
    g.watch = vec![Vec::new(); g.atoms.len()];
    for (ri, r) in g.rules.iter().enumerate() {
        for &a in &r.pos {
            g.watch[a].push(ri);
        }
    }
    g
}

impl GroundProgram {
    fn intern(&mut self, pred: &str, t: Tuple) -> usize {
        let key = (pred.to_string(), t);
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        let i = self.atoms.len();
        self.atoms.push(key.clone());
        self.index.insert(key, i);
        i
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    /// Least model of the rules selected by `active`, with negation ignored.
    fn least_model(&self, active: impl Fn(&GroundRule) -> bool) -> Vec<bool> {
        let mut truth = vec![false; self.atoms.len()];
        let mut missing: Vec<usize> = self.rules.iter().map(|r| r.pos.len()).collect();
        let on: Vec<bool> = self.rules.iter().map(&active).collect();
        let mut queue: Vec<usize> = Vec::new();
        for (ri, r) in self.rules.iter().enumerate() {
            if on[ri] && missing[ri] == 0 {
                if let Some(h) = r.head {
                    if !truth[h] {
                        truth[h] = true;
                        queue.push(h);
                    }
                }
            }
        }
        while let Some(a) = queue.pop() {
            for &ri in &self.watch[a] {
                missing[ri] -= 1;
                if on[ri] && missing[ri] == 0 {
                    if let Some(h) = self.rules[ri].head {
                        if !truth[h] {
                            truth[h] = true;
                            queue.push(h);
                        }
                    }
                }
            }
        }
        truth
    }

    /// Exact check: `m` equals the least model of its reduct, and no
    /// headless ground rule fires.
    fn stable(&self, m: &[bool]) -> bool {
        let lm = self.least_model(|r| r.neg.iter().all(|&a| !m[a]));
        let violated =
            self.rules.iter().any(|r| r.head.is_none() && r.pos.iter().all(|&a| m[a]) && r.neg.iter().all(|&a| !m[a]));
        lm == m && !violated
    }

    fn to_interpretation(&self, m: &[bool]) -> Interpretation {
        let mut out = self.base.clone();
        for (i, (p, t)) in self.atoms.iter().enumerate() {
            if m[i] {
                out.entry(p.clone()).or_default().insert(t.clone());
            }
        }
        out.retain(|_, ts| !ts.is_empty());
        out
    }

    fn assignment_of(&self, m: &Interpretation) -> Option<Vec<bool>> {
        let mut v = vec![false; self.atoms.len()];
        for (p, ts) in m {
            for t in ts {
                match self.index.get(&(p.clone(), t.clone())) {
                    Some(&i) => v[i] = true,
                    None if fixpoint::contains(&self.base, p, t) => {}
                    None => return None,
                }
            }
        }
        if self.base.iter().any(|(p, ts)| ts.iter().any(|t| !fixpoint::contains(m, p, t))) {
            return None;
        }
        Some(v)
    }
}

/// Definitional check of `m` against the rules and database.
pub fn is_stable(rules: &[Rule], db: &Database, m: &Interpretation) -> bool {
    let g = ground(rules, db);
    match g.assignment_of(m) {
        Some(v) => g.stable(&v),
        None => false,
    }
}

struct Search<'a> {
    g: &'a GroundProgram,
    order: Vec<usize>,
    negated: Vec<usize>,
    out: Vec<Interpretation>,
}

impl Search<'_> {
    /// Tightens the assignment from the lower and upper bound models;
    /// `None` on conflict.
    fn propagate(&self, assign: &mut [Option<bool>]) -> Option<Vec<bool>> {
        loop {
            let lower = self.g.least_model(|r| r.neg.iter().all(|&a| assign[a] == Some(false)));
            let upper = self.g.least_model(|r| r.neg.iter().all(|&a| assign[a] != Some(true)));
            let mut changed = false;
            for &a in &self.negated {
                match assign[a] {
                    Some(true) if !upper[a] => return None,
                    Some(false) if lower[a] => return None,
                    None if lower[a] => {
                        assign[a] = Some(true);
                        changed = true;
                    }
                    None if !upper[a] => {
                        assign[a] = Some(false);
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                return Some(lower);
            }
        }
    }

    fn run(&mut self, mut assign: Vec<Option<bool>>) {
        let Some(lower) = self.propagate(&mut assign) else { return };
        let next = self.order.iter().copied().find(|&a| assign[a].is_none());
        match next {
            None => {
                if self.g.stable(&lower) {
                    self.out.push(self.g.to_interpretation(&lower));
                }
            }
            Some(a) => {
                for v in [false, true] {
                    let mut child = assign.clone();
                    child[a] = Some(v);
                    self.run(child);
                }
            }
        }
    }
}

/// Every stable model of `rules` over `db`, sorted. Branching happens on
/// atoms of predicates negated inside their own recursive component; the
/// rest follows by propagation.
pub fn enumerate_stable_models(
    rules: &[Rule],
    db: &Database,
    bound: usize,
) -> Result<Vec<Interpretation>, OracleError> {
    let g = ground(rules, db);
    let mut negated: Vec<usize> = g.rules.iter().flat_map(|r| r.neg.iter().copied()).collect();
    negated.sort_unstable();
    negated.dedup();

    let dg = DependencyGraph::build(rules);
    let sccs = dg.sccs();
    let scc_of: BTreeMap<&str, usize> =
        sccs.iter().enumerate().flat_map(|(i, c)| c.iter().map(move |p| (p.as_str(), i))).collect();
    let choice_preds: BTreeSet<&str> = dg
        .negative_edges
        .iter()
        .filter(|(a, b)| scc_of.get(a.as_str()) == scc_of.get(b.as_str()))
        .map(|(a, _)| a.as_str())
        .collect();
    let mut choice: Vec<usize> =
        negated.iter().copied().filter(|&a| choice_preds.contains(g.atoms[a].0.as_str())).collect();
    if choice.len() > bound {
        return Err(OracleError::BoundExceeded(choice.len(), bound));
    }
    // Later components first, so constraint markers are decided early.
    choice.sort_by_key(|&a| (std::cmp::Reverse(scc_of.get(g.atoms[a].0.as_str()).copied()), a));
    let mut order = choice.clone();
    order.extend(negated.iter().copied().filter(|a| !choice.contains(a)));

    let mut s = Search { g: &g, order, negated, out: Vec::new() };
    s.run(vec![None; g.atoms.len()]);
    let mut out = s.out;
    out.sort();
    out.dedup();
    Ok(out)
}
