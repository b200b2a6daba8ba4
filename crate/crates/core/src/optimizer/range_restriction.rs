use indexmap::IndexMap;

use super::factors;
use crate::frontend::CmpOp;
use crate::transpile::{Binding, ConstraintKind, ConstraintModel, Term};

type Relations = IndexMap<String, Vec<String>>;

/// Variable domains introduced by a binding list.
fn binding_domains(bs: &[Binding], rels: &Relations) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for b in bs {
        match b {
            Binding::In { var, domain } => out.push((var.clone(), domain.clone())),
            Binding::Tuple { vars, relation } => {
                if let Some(cols) = rels.get(relation) {
                    out.extend(vars.iter().cloned().zip(cols.iter().cloned()));
                }
            }
        }
    }
    out
}

/// Distinct variables of an n-ary membership test, if that is all it has.
fn member_vars(t: &Term) -> Option<(&str, Vec<String>)> {
    let Term::Member { relation, args } = t else { return None };
    if args.len() < 2 {
        return None;
    }
    let mut vars: Vec<String> = Vec::new();
    for a in args {
        match a {
            Term::Var(v) if !vars.contains(v) => vars.push(v.clone()),
            _ => return None,
        }
    }
    Some((relation, vars))
}

/// Replaces the `In` bindings of `vars` by one tuple binding over
/// `relation` when the column domains agree. Returns whether it did.
fn bind_tuple(bs: &mut Vec<Binding>, relation: &str, vars: &[String], rels: &Relations) -> bool {
    let Some(cols) = rels.get(relation) else { return false };
    if cols.len() != vars.len() {
        return false;
    }
    let mut positions = Vec::new();
    for (v, col) in vars.iter().zip(cols) {
        match bs.iter().position(|b| matches!(b, Binding::In { var, domain } if var == v && domain == col)) {
            Some(i) => positions.push(i),
            None => return false,
        }
    }
    let first = *positions.iter().min().unwrap_or(&0);
    let mut kept = Vec::new();
    for (i, b) in bs.drain(..).enumerate() {
        if i == first {
            kept.push(Binding::Tuple { vars: vars.to_vec(), relation: relation.to_string() });
        }
        if !positions.contains(&i) {
            kept.push(b);
        }
    }
    *bs = kept;
    true
}

/// Membership factors of a product over exactly the bound variables move
/// into the bindings.
fn restrict_product(bs: &mut Vec<Binding>, body: &Term, rels: &Relations) -> Term {
    let mut out = Vec::new();
    for f in factors(body) {
        if let Some((rel, vars)) = member_vars(&f) {
            let rel = rel.to_string();
            if bind_tuple(bs, &rel, &vars, rels) {
                continue;
            }
        }
        out.push(f);
    }
    Term::product(out)
}

/// Self-membership `x in d` with `x` already ranging over `d` is 1; sum
/// bodies get the tuple treatment too.
fn restrict_term(t: Term, scope: &mut Vec<(String, String)>, rels: &Relations) -> Term {
    match t {
        Term::Member { relation, args } => {
            if let [Term::Var(v)] = args.as_slice() {
                if scope.iter().rev().find(|(x, _)| x == v).is_some_and(|(_, d)| *d == relation) {
                    return Term::Int(1);
                }
            }
            Term::Member { relation, args: args.into_iter().map(|a| restrict_term(a, scope, rels)).collect() }
        }
        Term::Sum { mut bindings, guards, body } => {
            let body = if bindings.iter().all(|b| matches!(b, Binding::In { .. })) {
                restrict_product(&mut bindings, &body, rels)
            } else {
                *body
            };
            let n = scope.len();
            scope.extend(binding_domains(&bindings, rels));
            let guards = guards.into_iter().map(|g| restrict_term(g, scope, rels)).collect();
            let body = restrict_term(body, scope, rels);
            scope.truncate(n);
            Term::Sum { bindings, guards, body: Box::new(drop_units(body)) }
        }
        Term::Access { array, args } => {
            Term::Access { array, args: args.into_iter().map(|a| restrict_term(a, scope, rels)).collect() }
        }
        Term::Product(ts) => drop_units(Term::Product(ts.into_iter().map(|x| restrict_term(x, scope, rels)).collect())),
        Term::Add(ts) => Term::Add(ts.into_iter().map(|x| restrict_term(x, scope, rels)).collect()),
        Term::Not(x) => Term::Not(Box::new(restrict_term(*x, scope, rels))),
        Term::Arith(op, a, b) => {
            Term::Arith(op, Box::new(restrict_term(*a, scope, rels)), Box::new(restrict_term(*b, scope, rels)))
        }
        Term::Cmp(op, a, b) => {
            Term::Cmp(op, Box::new(restrict_term(*a, scope, rels)), Box::new(restrict_term(*b, scope, rels)))
        }
        Term::Encode { domain, term } => Term::Encode { domain, term: Box::new(restrict_term(*term, scope, rels)) },
        Term::Decode { domain, term } => Term::Decode { domain, term: Box::new(restrict_term(*term, scope, rels)) },
        leaf => leaf,
    }
}

fn drop_units(t: Term) -> Term {
    match t {
        Term::Product(ts) => Term::product(ts.into_iter().filter(|x| !matches!(x, Term::Int(1))).collect()),
        other => other,
    }
}

pub fn pass_range_restriction(m: &ConstraintModel) -> ConstraintModel {
    let rels = &m.relations;
    let mut out = m.clone();
    for c in &mut out.constraints {
        // Only in an implication does a false membership make the
        // instance vacuous.
        if c.kind == ConstraintKind::Implies {
            if let Term::Cmp(CmpOp::Gt, body, zero) = &c.lhs {
                if **zero == Term::Int(0) {
                    let body = restrict_product(&mut c.bindings, body, rels);
                    c.lhs = Term::gt0(body);
                }
            }
        }
        let mut scope = binding_domains(&c.bindings, rels);
        c.guards = std::mem::take(&mut c.guards).into_iter().map(|g| restrict_term(g, &mut scope, rels)).collect();
        c.lhs = restrict_term(std::mem::replace(&mut c.lhs, Term::Int(0)), &mut scope, rels);
        c.rhs = restrict_term(std::mem::replace(&mut c.rhs, Term::Int(0)), &mut scope, rels);
    }
    if let Some(o) = &mut out.objective {
        o.term = restrict_term(o.term.clone(), &mut Vec::new(), rels);
    }
    out
}
