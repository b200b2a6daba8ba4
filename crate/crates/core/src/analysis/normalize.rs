use std::collections::{BTreeMap, BTreeSet};

use super::{fresh_var, rule_vars};
use crate::frontend::{Atom, CmpOp, Conj, DomainExpr, Expr, Literal, Program, Rule, RuleKind, Schema, Term, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub program: Program,
    pub schema: Schema,
}

/// Rewrites an inferred program into canonical form:
/// one extended rule per standard predicate, guesses as generalized
/// partition or subset rules, constants only in comparisons, and no
/// variable read from two different domains by positive atoms.
pub fn normalize(p: &Program, s: &Schema) -> Normalized {
    let mut schema = s.clone();
    let rules = rewrite_partitions(&p.rules, &mut schema);
    let rules = merge_standard(rules);
    let rules = rules.into_iter().map(hoist_constants).map(|r| separate_domains(r, &schema)).collect();
    Normalized { program: Program { rules, goal: p.goal.clone() }, schema }
}

fn eq(a: &str, b: Expr) -> Literal {
    Literal::Cmp(CmpOp::Eq, Expr::Var(a.to_string()), b)
}

fn all_names(rules: &[Rule], schema: &Schema) -> BTreeSet<String> {
    let mut out: BTreeSet<String> = schema.all_domains().into_iter().collect();
    out.extend(schema.predicates.keys().cloned());
    out.extend(schema.idb.keys().cloned());
    for r in rules {
        out.extend(r.defined().into_iter().map(String::from));
    }
    out
}

fn fresh_name(base: &str, used: &mut BTreeSet<String>) -> String {
    let mut k = 1;
    loop {
        let cand = format!("{base}__nf{k}");
        if used.insert(cand.clone()) {
            return cand;
        }
        k += 1;
    }
}

fn insert_conditions(r: &mut Rule, ci: usize, lits: Vec<Literal>) {
    let conj = &mut r.body[ci];
    if r.kind == RuleKind::GeneralizedPartition && !conj.is_empty() {
        let at = conj.len() - 1;
        conj.splice(at..at, lits);
    } else {
        conj.extend(lits);
    }
}

/// Forms with several heads become a subset rule plus a complement rule
/// (two heads), a generalized partition over a fresh enumeration domain
/// (three or more predicates), or a generalized partition over the label
/// constants (one predicate with constant last arguments).
fn rewrite_partitions(rules: &[Rule], schema: &mut Schema) -> Vec<Rule> {
    let mut used = all_names(rules, schema);
    let mut out = Vec::new();
    for r in rules {
        if r.kind != RuleKind::Partition {
            out.push(r.clone());
            continue;
        }
        let body = r.conj().clone();
        let mut vars: BTreeSet<String> = rule_vars(r, &body).into_iter().collect();
        let same_pred = r.head.iter().all(|h| h.pred == r.head[0].pred);
        if same_pred {
            let h = &r.head[0];
            let n = h.args.len();
            let dom = schema.idb.get(&h.pred).and_then(|s| s.last().cloned()).unwrap_or_default();
            let label = fresh_var("L", &mut vars);
            let mut args = h.args[..n - 1].to_vec();
            args.push(Term::Var(label.clone()));
            let mut conj = body;
            conj.push(Literal::Pos(Atom::new(dom, vec![Term::Var(label.clone())])));
            out.push(Rule {
                kind: RuleKind::GeneralizedPartition,
                head: vec![Atom::new(h.pred.clone(), args)],
                body: vec![conj],
                label: Some(label),
            });
        } else if r.head.len() == 2 {
            let (a, b) = (&r.head[0], &r.head[1]);
            out.push(Rule { kind: RuleKind::Subset, head: vec![a.clone()], body: vec![body.clone()], label: None });
            let mut conj = body;
            conj.push(Literal::Neg(a.clone()));
            out.push(Rule::standard(b.clone(), conj));
        } else {
            let k = r.head.len();
            let first = &r.head[0];
            let q = fresh_name(&first.pred, &mut used);
            let dom = format!("{q}__d{}", first.args.len() + 1);
            used.insert(dom.clone());
            schema.derived_domains.insert(dom.clone(), DomainExpr::Values((1..=k as i64).map(Value::Int).collect()));
            let mut sig = schema.idb.get(&first.pred).cloned().unwrap_or_default();
            sig.push(dom.clone());
            schema.idb.insert(q.clone(), sig);
            let label = fresh_var("L", &mut vars);
            let mut args = first.args.clone();
            args.push(Term::Var(label.clone()));
            let mut conj = body;
            conj.push(Literal::Pos(Atom::new(dom, vec![Term::Var(label.clone())])));
            let qatom = Atom::new(q.clone(), args);
            out.push(Rule {
                kind: RuleKind::GeneralizedPartition,
                head: vec![qatom.clone()],
                body: vec![conj],
                label: Some(label.clone()),
            });
            for (j, h) in r.head.iter().enumerate() {
                let mut qa = qatom.clone();
                let n = qa.args.len();
                qa.args[..n - 1].clone_from_slice(&h.args);
                out.push(Rule::standard(
                    h.clone(),
                    vec![Literal::Pos(qa), eq(&label, Expr::Const(Value::Int(j as i64 + 1)))],
                ));
            }
        }
    }
    out
}

fn subst_term(t: &Term, m: &BTreeMap<String, String>) -> Term {
    match t {
        Term::Var(v) => Term::Var(m.get(v).cloned().unwrap_or_else(|| v.clone())),
        c => c.clone(),
    }
}

fn subst_expr(e: &Expr, m: &BTreeMap<String, String>) -> Expr {
    match e {
        Expr::Var(v) => Expr::Var(m.get(v).cloned().unwrap_or_else(|| v.clone())),
        Expr::Const(c) => Expr::Const(c.clone()),
        Expr::Bin(op, a, b) => Expr::Bin(*op, Box::new(subst_expr(a, m)), Box::new(subst_expr(b, m))),
    }
}

fn subst_literal(l: &Literal, m: &BTreeMap<String, String>) -> Literal {
    let atom = |a: &Atom| Atom::new(a.pred.clone(), a.args.iter().map(|t| subst_term(t, m)).collect());
    match l {
        Literal::Pos(a) => Literal::Pos(atom(a)),
        Literal::Neg(a) => Literal::Neg(atom(a)),
        Literal::Cmp(op, a, b) => Literal::Cmp(*op, subst_expr(a, m), subst_expr(b, m)),
    }
}

/// Joins all standard rules for one predicate into an extended rule over a
/// canonical head of distinct variables, placed at the first rule's index.
fn merge_standard(rules: Vec<Rule>) -> Vec<Rule> {
    let mut groups: BTreeMap<String, Vec<Rule>> = BTreeMap::new();
    for r in rules.iter().filter(|r| r.kind == RuleKind::Standard) {
        groups.entry(r.head[0].pred.clone()).or_default().push(r.clone());
    }
    let mut out = Vec::new();
    for r in rules {
        if r.kind != RuleKind::Standard {
            out.push(r);
            continue;
        }
        if let Some(g) = groups.remove(&r.head[0].pred) {
            out.push(merge_group(&g));
        }
    }
    out
}

fn merge_group(group: &[Rule]) -> Rule {
    let mut all_vars: BTreeSet<String> = BTreeSet::new();
    for r in group {
        for c in &r.body {
            all_vars.extend(rule_vars(r, c));
        }
    }
    let first = &group[0].head[0];
    let mut canon: Vec<String> = Vec::new();
    let mut reserved = all_vars.clone();
    for t in &first.args {
        match t {
            Term::Var(v) if !canon.contains(v) => canon.push(v.clone()),
            _ => canon.push(fresh_var("H", &mut reserved)),
        }
    }
    let canon_set: BTreeSet<String> = canon.iter().cloned().collect();
    let mut disjuncts: Vec<Conj> = Vec::new();
    for r in group {
        let h = &r.head[0];
        for conj in &r.body {
            let mut map: BTreeMap<String, String> = BTreeMap::new();
            let mut eqs = Vec::new();
            for (i, t) in h.args.iter().enumerate() {
                match t {
                    Term::Var(v) => match map.get(v) {
                        Some(prev) => eqs.push(eq(&canon[i], Expr::Var(prev.clone()))),
                        None => {
                            map.insert(v.clone(), canon[i].clone());
                        }
                    },
                    Term::Const(c) => eqs.push(eq(&canon[i], Expr::Const(c.clone()))),
                }
            }
            let mut used: BTreeSet<String> = canon_set.clone();
            used.extend(rule_vars(r, conj));
            used.extend(map.values().cloned());
            for v in crate::frontend::conj_vars(conj) {
                if !map.contains_key(&v) && canon_set.contains(&v) {
                    let nv = fresh_var(&v, &mut used);
                    map.insert(v, nv);
                }
            }
            let mut c: Conj = conj.iter().map(|l| subst_literal(l, &map)).collect();
            c.extend(eqs);
            disjuncts.push(c);
        }
    }
    if first.args.is_empty() && disjuncts.iter().any(|d| d.is_empty()) {
        disjuncts = vec![Vec::new()];
    }
    Rule {
        kind: RuleKind::Standard,
        head: vec![Atom::new(first.pred.clone(), canon.into_iter().map(Term::Var).collect())],
        body: disjuncts,
        label: None,
    }
}

/// Moves constants out of positive atoms and guess heads into equalities.
fn hoist_constants(mut r: Rule) -> Rule {
    for ci in 0..r.body.len() {
        let mut used: BTreeSet<String> = rule_vars(&r, &r.body[ci]).into_iter().collect();
        let mut extra = Vec::new();
        if r.is_guess() && ci == 0 {
            let mut seen: Vec<String> = Vec::new();
            let label = r.label.clone();
            let gp = r.kind == RuleKind::GeneralizedPartition;
            for h in r.head.iter_mut() {
                let n = h.args.len();
                for (i, t) in h.args.iter_mut().enumerate() {
                    let is_label = gp && i + 1 == n && t.var() == label.as_deref();
                    if is_label {
                        continue;
                    }
                    match t {
                        Term::Const(c) => {
                            let v = fresh_var("V", &mut used);
                            extra.push(eq(&v, Expr::Const(c.clone())));
                            *t = Term::Var(v);
                        }
                        Term::Var(x) if seen.contains(x) => {
                            let v = fresh_var(x, &mut used);
                            extra.push(eq(&v, Expr::Var(x.clone())));
                            *t = Term::Var(v);
                        }
                        Term::Var(x) => seen.push(x.clone()),
                    }
                }
            }
        }
        for l in r.body[ci].iter_mut() {
            if let Literal::Pos(a) = l {
                for t in a.args.iter_mut() {
                    if let Term::Const(c) = t {
                        let v = fresh_var("V", &mut used);
                        extra.push(eq(&v, Expr::Const(c.clone())));
                        *t = Term::Var(v);
                    }
                }
            }
        }
        if !extra.is_empty() {
            insert_conditions(&mut r, ci, extra);
        }
    }
    r
}

/// A variable read by positive atoms from two different domains keeps its
/// first domain; later occurrences get fresh variables equated to it.
/// Negated atoms only test membership and are left alone.
fn separate_domains(mut r: Rule, s: &Schema) -> Rule {
    for ci in 0..r.body.len() {
        let mut used: BTreeSet<String> = rule_vars(&r, &r.body[ci]).into_iter().collect();
        let mut home: BTreeMap<String, String> = BTreeMap::new();
        let mut extra = Vec::new();
        for l in r.body[ci].iter_mut() {
            let Literal::Pos(a) = l else { continue };
            let Some(sig) = s.signature(&a.pred) else { continue };
            for (i, t) in a.args.iter_mut().enumerate() {
                let (Term::Var(v), Some(d)) = (&*t, sig.get(i)) else { continue };
                match home.get(v) {
                    None => {
                        home.insert(v.clone(), d.clone());
                    }
                    Some(h) if h == d => {}
                    Some(_) => {
                        let nv = fresh_var(v, &mut used);
                        home.insert(nv.clone(), d.clone());
                        extra.push(eq(&nv, Expr::Var(v.clone())));
                        *t = Term::Var(nv);
                    }
                }
            }
        }
        if !extra.is_empty() {
            insert_conditions(&mut r, ci, extra);
        }
    }
    r
}
