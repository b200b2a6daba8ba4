use std::collections::{BTreeMap, BTreeSet};

use super::{AnalysisError, Diagnostic};
use crate::frontend::{DomainExpr, Literal, Program, RuleKind, Schema, Term, Value};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum DomAtom {
    Named(String),
    Const(Value),
}

/// A domain as a union of intersections.
type Alt = BTreeSet<DomAtom>;
type Dnf = BTreeSet<Alt>;

fn single(a: DomAtom) -> Dnf {
    BTreeSet::from([BTreeSet::from([a])])
}

fn and(a: &Dnf, b: &Dnf) -> Dnf {
    let mut out = Dnf::new();
    for x in a {
        for y in b {
            out.insert(x.union(y).cloned().collect());
        }
    }
    out
}

fn statically_empty(alt: &Alt, s: &Schema) -> bool {
    let consts: Vec<&Value> = alt
        .iter()
        .filter_map(|a| match a {
            DomAtom::Const(c) => Some(c),
            _ => None,
        })
        .collect();
    if consts.windows(2).any(|w| w[0] != w[1]) {
        return true;
    }
    let mut int = false;
    let mut string = false;
    for a in alt {
        if let DomAtom::Named(d) = a {
            if s.is_int_domain(d) {
                int = true;
            } else if s.is_declared_domain(d) {
                string = true;
            }
        }
    }
    int && string
}

/// Drops statically empty alternatives and anything absorbed by a subset.
fn simplify(d: Dnf, s: &Schema) -> Dnf {
    let alts: Vec<Alt> = d.into_iter().filter(|a| !statically_empty(a, s)).collect();
    alts.iter().filter(|a| !alts.iter().any(|b| b != *a && b.is_subset(a))).cloned().collect()
}

fn occurrence(state: &BTreeMap<(String, usize), Dnf>, s: &Schema, pred: &str, i: usize) -> Option<Dnf> {
    if s.is_edb(pred) {
        let sig = s.signature(pred)?;
        return sig.get(i).map(|d| single(DomAtom::Named(d.clone())));
    }
    Some(state.get(&(pred.to_string(), i)).cloned().unwrap_or_default())
}

fn head_dnf(conj: &[Literal], t: &Term, state: &BTreeMap<(String, usize), Dnf>, s: &Schema) -> Option<Dnf> {
    match t {
        Term::Const(c) => Some(single(DomAtom::Const(c.clone()))),
        Term::Var(v) => {
            let mut acc: Option<Dnf> = None;
            for l in conj {
                let Literal::Pos(a) = l else { continue };
                for (i, arg) in a.args.iter().enumerate() {
                    if arg.var() == Some(v) {
                        let d = occurrence(state, s, &a.pred, i)?;
                        acc = Some(match acc {
                            None => d,
                            Some(x) => and(&x, &d),
                        });
                    }
                }
            }
            acc
        }
    }
}

fn to_expr(d: &Dnf) -> DomainExpr {
    let mut values: Vec<Value> = Vec::new();
    let mut parts: Vec<DomainExpr> = Vec::new();
    for alt in d {
        if alt.len() == 1 {
            match alt.iter().next() {
                Some(DomAtom::Const(c)) => {
                    values.push(c.clone());
                    continue;
                }
                Some(DomAtom::Named(n)) => {
                    parts.push(DomainExpr::Named(n.clone()));
                    continue;
                }
                None => {}
            }
        }
        let conj = alt
            .iter()
            .map(|a| match a {
                DomAtom::Named(n) => DomainExpr::Named(n.clone()),
                DomAtom::Const(c) => DomainExpr::Values(vec![c.clone()]),
            })
            .collect();
        parts.push(DomainExpr::Intersection(conj));
    }
    if !values.is_empty() {
        parts.push(DomainExpr::Values(values));
    }
    if parts.len() == 1 {
        parts.pop().unwrap_or(DomainExpr::Values(Vec::new()))
    } else {
        DomainExpr::Union(parts)
    }
}

/// Gives every IDB predicate a signature. A position fed by one declared
/// domain keeps it; anything else gets a fresh derived domain
/// `<pred>__d<i>` whose definition is a union of intersections.
pub fn infer_schemas(p: &Program, s: &Schema) -> Result<(Schema, Vec<Diagnostic>), AnalysisError> {
    let mut state: BTreeMap<(String, usize), Dnf> = BTreeMap::new();
    let mut arity: Vec<(String, usize)> = Vec::new();
    for r in &p.rules {
        for h in &r.head {
            if !arity.iter().any(|(q, _)| *q == h.pred) {
                arity.push((h.pred.clone(), h.args.len()));
            }
        }
    }
    loop {
        let mut changed = false;
        for r in p.rules.iter().filter(|r| r.kind != RuleKind::Constraint) {
            for conj in &r.body {
                for h in &r.head {
                    for (i, t) in h.args.iter().enumerate() {
                        let Some(d) = head_dnf(conj, t, &state, s) else { continue };
                        let key = (h.pred.clone(), i);
                        let old = state.get(&key).cloned().unwrap_or_default();
                        let mut merged = old.clone();
                        merged.extend(d);
                        let merged = simplify(merged, s);
                        if merged != old {
                            state.insert(key, merged);
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    let mut out = s.clone();
    let mut warnings = Vec::new();
    for (pred, n) in arity {
        let mut sig = Vec::with_capacity(n);
        for i in 0..n {
            let d = state.get(&(pred.clone(), i)).cloned().unwrap_or_default();
            if d.is_empty() {
                warnings.push(Diagnostic::warning(format!(
                    "predicate `{pred}` is empty: argument {} has an empty domain",
                    i + 1
                )));
            }
            let named = match d.iter().next() {
                Some(alt) if d.len() == 1 && alt.len() == 1 => match alt.iter().next() {
                    Some(DomAtom::Named(n)) => Some(n.clone()),
                    _ => None,
                },
                _ => None,
            };
            let name = match named {
                Some(n) => n,
                None => {
                    let name = format!("{pred}__d{}", i + 1);
                    out.derived_domains.insert(name.clone(), to_expr(&d));
                    name
                }
            };
            sig.push(name);
        }
        out.idb.insert(pred, sig);
    }
    Ok((out, warnings))
}
