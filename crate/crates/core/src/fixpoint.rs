//! Naive bottom-up evaluation of stratified standard rules.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;

use crate::analysis::{stratify, AnalysisError};
use crate::frontend::{ArithOp, Atom, CmpOp, Database, Expr, Literal, Rule, RuleKind, Term, Tuple, Value};

/// Ground atoms grouped by predicate.
pub type Interpretation = BTreeMap<String, BTreeSet<Tuple>>;

pub type Binding = BTreeMap<String, Value>;

pub fn from_database(db: &Database) -> Interpretation {
    db.atoms()
}

pub fn contains(i: &Interpretation, pred: &str, t: &[Value]) -> bool {
    i.get(pred).is_some_and(|s| s.contains(t))
}

pub fn atom_count(i: &Interpretation) -> usize {
    i.values().map(|s| s.len()).sum()
}

/// Adds every atom of `other`; returns whether anything was new.
pub fn merge(into: &mut Interpretation, other: &Interpretation) -> bool {
    let mut changed = false;
    for (p, ts) in other {
        let e = into.entry(p.clone()).or_default();
        for t in ts {
            changed |= e.insert(t.clone());
        }
    }
    changed
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Num {
    Int(BigInt),
    Sym(String),
}

impl From<&Value> for Num {
    fn from(v: &Value) -> Num {
        match v {
            Value::Int(i) => Num::Int(BigInt::from(*i)),
            Value::Sym(s) => Num::Sym(s.clone()),
        }
    }
}

impl Num {
    pub(crate) fn to_value(&self) -> Option<Value> {
        match self {
            Num::Int(i) => i64::try_from(i).ok().map(Value::Int),
            Num::Sym(s) => Some(Value::Sym(s.clone())),
        }
    }
}

pub(crate) fn eval_expr(e: &Expr, b: &Binding) -> Option<Num> {
    match e {
        Expr::Var(v) => b.get(v).map(Num::from),
        Expr::Const(c) => Some(Num::from(c)),
        Expr::Bin(op, l, r) => {
            let (Num::Int(x), Num::Int(y)) = (eval_expr(l, b)?, eval_expr(r, b)?) else {
                return None;
            };
            Some(Num::Int(match op {
                ArithOp::Add => x + y,
                ArithOp::Sub => x - y,
                ArithOp::Mul => x * y,
            }))
        }
    }
}

/// Comparison semantics shared with the oracle: symbols only support
/// (in)equality against anything; integers compare numerically.
pub(crate) fn compare(op: CmpOp, a: &Num, b: &Num) -> bool {
    match (a, b) {
        (Num::Int(_), Num::Int(_)) | (Num::Sym(_), Num::Sym(_)) => op.holds(a, b),
        _ => op == CmpOp::Ne,
    }
}

fn expr_ready(e: &Expr, b: &Binding) -> bool {
    let mut vs = Vec::new();
    e.vars(&mut vs);
    vs.iter().all(|v| b.contains_key(v))
}

fn atom_ready(a: &Atom, b: &Binding) -> bool {
    a.args.iter().all(|t| t.var().is_none_or(|v| b.contains_key(v)))
}

fn ground_args(a: &Atom, b: &Binding) -> Option<Tuple> {
    a.args
        .iter()
        .map(|t| match t {
            Term::Var(v) => b.get(v).cloned(),
            Term::Const(c) => Some(c.clone()),
        })
        .collect()
}

/// Enumerates every extension of `b` satisfying `conj` over `interp`.
pub fn solve_conj(conj: &[Literal], interp: &Interpretation, b: &mut Binding, out: &mut dyn FnMut(&Binding)) {
    let remaining: Vec<usize> = (0..conj.len()).collect();
    step(conj, &remaining, interp, b, out);
}

fn step(conj: &[Literal], rem: &[usize], interp: &Interpretation, b: &mut Binding, out: &mut dyn FnMut(&Binding)) {
    if rem.is_empty() {
        out(b);
        return;
    }
    // Filters first, then equality assignments, then the first positive atom.
    let mut pick: Option<(usize, u8)> = None;
    for (k, &i) in rem.iter().enumerate() {
        let prio = match &conj[i] {
            Literal::Cmp(_, l, r) if expr_ready(l, b) && expr_ready(r, b) => 0,
            Literal::Neg(a) if atom_ready(a, b) => 0,
            Literal::Cmp(CmpOp::Eq, l, r) => {
                let assignable =
                    |x: &Expr, y: &Expr| matches!(x, Expr::Var(v) if !b.contains_key(v)) && expr_ready(y, b);
                if assignable(l, r) || assignable(r, l) {
                    1
                } else {
                    continue;
                }
            }
            Literal::Pos(_) => 2,
            _ => continue,
        };
        if pick.is_none_or(|(_, p)| prio < p) {
            pick = Some((k, prio));
        }
        if prio == 0 {
            break;
        }
    }
    let Some((k, _)) = pick else { return };
    let i = rem[k];
    let rest: Vec<usize> = rem.iter().copied().filter(|&j| j != i).collect();
    match &conj[i] {
        Literal::Cmp(op, l, r) if expr_ready(l, b) && expr_ready(r, b) => {
            if let (Some(x), Some(y)) = (eval_expr(l, b), eval_expr(r, b)) {
                if compare(*op, &x, &y) {
                    step(conj, &rest, interp, b, out);
                }
            }
        }
        Literal::Cmp(_, l, r) => {
            let (var, e) = match l {
                Expr::Var(v) if !b.contains_key(v) => (v.clone(), r),
                _ => match r {
                    Expr::Var(v) => (v.clone(), l),
                    _ => return,
                },
            };
            if let Some(val) = eval_expr(e, b).and_then(|n| n.to_value()) {
                b.insert(var.clone(), val);
                step(conj, &rest, interp, b, out);
                b.remove(&var);
            }
        }
        Literal::Neg(a) => {
            if let Some(t) = ground_args(a, b) {
                if !contains(interp, &a.pred, &t) {
                    step(conj, &rest, interp, b, out);
                }
            }
        }
        Literal::Pos(a) => {
            let Some(rel) = interp.get(&a.pred) else { return };
            if let Some(t) = atom_ready(a, b).then(|| ground_args(a, b)).flatten() {
                if rel.contains(&t) {
                    step(conj, &rest, interp, b, out);
                }
                return;
            }
            for t in rel {
                if t.len() != a.args.len() {
                    continue;
                }
                let mut added: Vec<String> = Vec::new();
                let mut ok = true;
                for (arg, v) in a.args.iter().zip(t) {
                    match arg {
                        Term::Const(c) => ok = c == v,
                        Term::Var(x) => match b.get(x) {
                            Some(w) => ok = w == v,
                            None => {
                                b.insert(x.clone(), v.clone());
                                added.push(x.clone());
                            }
                        },
                    }
                    if !ok {
                        break;
                    }
                }
                if ok {
                    step(conj, &rest, interp, b, out);
                }
                for x in added {
                    b.remove(&x);
                }
            }
        }
    }
}

/// Whether some extension of the empty binding satisfies `conj`.
pub fn satisfiable(conj: &[Literal], interp: &Interpretation) -> bool {
    let mut found = false;
    let mut b = Binding::new();
    // A full enumeration is cheap at this scale and keeps the planner simple.
    solve_conj(conj, interp, &mut b, &mut |_| found = true);
    found
}

/// Head instantiations of one standard rule whose body (some disjunct)
/// holds in `current`.
pub fn derive_once(rule: &Rule, current: &Interpretation) -> BTreeSet<Tuple> {
    let mut out = BTreeSet::new();
    let head = &rule.head[0];
    for conj in &rule.body {
        let mut b = Binding::new();
        solve_conj(conj, current, &mut b, &mut |b| {
            if let Some(t) = ground_args(head, b) {
                out.insert(t);
            }
        });
    }
    out
}

/// Naive iteration of one stratum to its fixpoint.
pub fn evaluate_stratum(rules: &[Rule], interp: &mut Interpretation) -> usize {
    let mut rounds = 0;
    loop {
        rounds += 1;
        let mut fresh = Interpretation::new();
        for r in rules {
            let derived = derive_once(r, interp);
            fresh.entry(r.head[0].pred.clone()).or_default().extend(derived);
        }
        if !merge(interp, &fresh) {
            return rounds;
        }
    }
}

pub fn evaluate_strata(strata: &[Vec<Rule>], base: &Interpretation) -> Interpretation {
    let mut interp = base.clone();
    for s in strata {
        for r in s {
            interp.entry(r.head[0].pred.clone()).or_default();
        }
        evaluate_stratum(s, &mut interp);
    }
    interp
}

/// Perfect model of `rules` over `base`.
pub fn evaluate_stratified(rules: &[Rule], base: &Interpretation) -> Result<Interpretation, AnalysisError> {
    let strata = stratify(rules)?;
    Ok(evaluate_strata(&strata, base))
}

/// A constraint holds when its body has no satisfying instance.
pub fn constraint_holds(c: &Rule, interp: &Interpretation) -> bool {
    debug_assert_eq!(c.kind, RuleKind::Constraint);
    c.body.iter().all(|conj| !satisfiable(conj, interp))
}
