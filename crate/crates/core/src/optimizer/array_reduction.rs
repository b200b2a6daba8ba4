use std::collections::BTreeMap;

use crate::frontend::{CmpOp, Literal, Program, RuleKind, Value};
use crate::transpile::{Binding, Constraint, ConstraintModel, Decl, Term};

/// One reducible array: `s[X.., L]` with `L` over `domain`.
struct Target {
    array: String,
    domain: String,
    lo: i64,
}

fn targets(m: &ConstraintModel, p: &Program) -> Vec<Target> {
    let mut out: Vec<Target> = Vec::new();
    for r in p.rules.iter().filter(|r| r.kind == RuleKind::GeneralizedPartition) {
        let s = &r.head[0].pred;
        let Some(Decl::Bool { index, .. }) = m.decl(s) else { continue };
        let Some((Literal::Pos(d), body)) = r.conj().split_last() else { continue };
        if index.last() != Some(&d.pred) {
            continue;
        }
        // Bodies made of domain atoms hold for every key, so the key
        // always gets a label and code 0 is never needed.
        let domain_only = body.iter().all(|l| matches!(l, Literal::Pos(a) if m.relations.get(&a.pred).is_some_and(|c| c.len() == 1 && c[0] == a.pred)));
        let lo = if domain_only { 1 } else { 0 };
        if out.iter().any(|t| t.domain == d.pred && t.lo != lo) {
            continue;
        }
        out.push(Target { array: s.clone(), domain: d.pred.clone(), lo });
    }
    out
}

fn range_name(domain: &str) -> String {
    format!("int{domain}")
}

/// Existence constraint shape: `... => sum(l in d) s[.., l] == 1`.
fn is_existence(c: &Constraint, t: &Target) -> bool {
    let Term::Cmp(CmpOp::Eq, sum, one) = &c.rhs else { return false };
    if **one != Term::Int(1) {
        return false;
    }
    let Term::Sum { bindings, guards, body } = &**sum else { return false };
    let [Binding::In { var, domain }] = bindings.as_slice() else { return false };
    guards.is_empty()
        && *domain == t.domain
        && matches!(&**body, Term::Access { array, args } if *array == t.array && args.last() == Some(&Term::Var(var.clone())))
}

/// Rebinds variables over reduced domains to their code ranges; adds
/// the `v != 0` guard when code 0 is in the range.
fn rebind(bs: &mut [Binding], guards: &mut Vec<Term>, ranges: &BTreeMap<String, (String, i64)>) {
    for b in bs.iter_mut() {
        if let Binding::In { var, domain } = b {
            if let Some((r, lo)) = ranges.get(domain.as_str()) {
                *domain = r.clone();
                if *lo == 0 {
                    guards.push(Term::cmp(CmpOp::Ne, Term::Var(var.clone()), Term::Int(0)));
                }
            }
        }
    }
}

fn rewrite(t: Term, reduced: &BTreeMap<String, String>, ranges: &BTreeMap<String, (String, i64)>) -> Term {
    t.map(&mut |x| match x {
        Term::Sum { mut bindings, mut guards, body } => {
            rebind(&mut bindings, &mut guards, ranges);
            Term::Sum { bindings, guards, body }
        }
        Term::Access { array, mut args } if reduced.contains_key(&array) => {
            let label = args.pop().unwrap_or(Term::Int(0));
            Term::cmp(CmpOp::Eq, Term::Access { array, args }, label)
        }
        other => other,
    })
}

#[derive(Clone, PartialEq, Eq)]
enum Kind {
    Plain,
    Code(String),
}

struct Coerce<'a> {
    m: &'a ConstraintModel,
}

impl Coerce<'_> {
    fn code_of_range(&self, r: &str) -> Option<String> {
        self.m.codes.get(r).cloned()
    }

    fn kind(&self, t: &Term, env: &[(String, Kind)]) -> Kind {
        match t {
            Term::Var(v) => env.iter().rev().find(|(x, _)| x == v).map(|(_, k)| k.clone()).unwrap_or(Kind::Plain),
            Term::Access { array, .. } => match self.m.decl(array) {
                Some(Decl::Int { range, .. }) => self.code_of_range(range).map_or(Kind::Plain, Kind::Code),
                _ => Kind::Plain,
            },
            Term::Encode { domain, .. } => Kind::Code(domain.clone()),
            _ => Kind::Plain,
        }
    }

    fn env_of(&self, bs: &[Binding]) -> Vec<(String, Kind)> {
        let mut out = Vec::new();
        for b in bs {
            match b {
                Binding::In { var, domain } => {
                    out.push((var.clone(), self.code_of_range(domain).map_or(Kind::Plain, Kind::Code)));
                }
                Binding::Tuple { vars, .. } => out.extend(vars.iter().map(|v| (v.clone(), Kind::Plain))),
            }
        }
        out
    }

    fn to(&self, t: Term, want: &Kind, env: &mut Vec<(String, Kind)>) -> Term {
        let t = self.walk(t, env);
        let have = self.kind(&t, env);
        if have == *want {
            return t;
        }
        let plain = match (have, t) {
            (Kind::Code(d), Term::Encode { domain, term }) if domain == d => *term,
            (Kind::Code(d), t) => Term::Decode { domain: d, term: Box::new(t) },
            (Kind::Plain, t) => t,
        };
        match (want, plain) {
            (Kind::Plain, t) => t,
            (Kind::Code(d), Term::Decode { domain, term }) if domain == *d => *term,
            (Kind::Code(d), t) => Term::Encode { domain: d.clone(), term: Box::new(t) },
        }
    }

    fn walk(&self, t: Term, env: &mut Vec<(String, Kind)>) -> Term {
        match t {
            Term::Access { array, args } => {
                let index: Vec<String> =
                    self.m.decl(&array).and_then(|d| d.index()).map(|ix| ix.to_vec()).unwrap_or_default();
                let args = args
                    .into_iter()
                    .enumerate()
                    .map(|(i, a)| {
                        let want = index.get(i).and_then(|r| self.code_of_range(r)).map_or(Kind::Plain, Kind::Code);
                        self.to(a, &want, env)
                    })
                    .collect();
                Term::Access { array, args }
            }
            Term::Member { relation, args } => {
                Term::Member { relation, args: args.into_iter().map(|a| self.to(a, &Kind::Plain, env)).collect() }
            }
            Term::Arith(op, a, b) => {
                Term::Arith(op, Box::new(self.to(*a, &Kind::Plain, env)), Box::new(self.to(*b, &Kind::Plain, env)))
            }
            Term::Cmp(op, a, b) => {
                let a = self.walk(*a, env);
                let b = self.walk(*b, env);
                let (ka, kb) = (self.kind(&a, env), self.kind(&b, env));
                if ka == kb {
                    return Term::Cmp(op, Box::new(a), Box::new(b));
                }
                let is_const = |t: &Term| matches!(t, Term::Sym(_) | Term::Int(_));
                let want = match (&ka, &kb, op) {
                    (Kind::Code(_), Kind::Plain, CmpOp::Eq | CmpOp::Ne)
                        if is_const(&b) || matches!(b, Term::Var(_)) =>
                    {
                        ka.clone()
                    }
                    (Kind::Plain, Kind::Code(_), CmpOp::Eq | CmpOp::Ne)
                        if is_const(&a) || matches!(a, Term::Var(_)) =>
                    {
                        kb.clone()
                    }
                    _ => Kind::Plain,
                };
                Term::Cmp(op, Box::new(self.to(a, &want, env)), Box::new(self.to(b, &want, env)))
            }
            Term::Sum { bindings, guards, body } => {
                let n = env.len();
                env.extend(self.env_of(&bindings));
                let guards = guards.into_iter().map(|g| self.walk(g, env)).collect();
                let body = self.walk(*body, env);
                env.truncate(n);
                Term::Sum { bindings, guards, body: Box::new(body) }
            }
            Term::Product(ts) => Term::Product(ts.into_iter().map(|x| self.walk(x, env)).collect()),
            Term::Add(ts) => Term::Add(ts.into_iter().map(|x| self.walk(x, env)).collect()),
            Term::Not(x) => Term::Not(Box::new(self.walk(*x, env))),
            Term::Encode { domain, term } => {
                let inner = self.to(*term, &Kind::Plain, env);
                Term::Encode { domain, term: Box::new(inner) }
            }
            Term::Decode { domain, term } => {
                let inner = self.to(*term, &Kind::Code(domain.clone()), env);
                Term::Decode { domain, term: Box::new(inner) }
            }
            leaf => leaf,
        }
    }
}

/// Generalized-partition arrays `s[X.., L]` become integer arrays
/// `s[X..]` holding the code of `L`.
pub fn pass_array_reduction(m: &ConstraintModel, p: &Program) -> ConstraintModel {
    let ts = targets(m, p);
    if ts.is_empty() {
        return m.clone();
    }
    let mut out = m.clone();

    let mut prelude = Vec::new();
    let mut ranges: BTreeMap<String, (String, i64)> = BTreeMap::new();
    for t in &ts {
        if ranges.contains_key(&t.domain) {
            continue;
        }
        let card = format!("card{}", t.domain);
        let r = range_name(&t.domain);
        prelude.push(Decl::Card { name: card.clone(), domain: t.domain.clone() });
        prelude.push(Decl::Range { name: r.clone(), lo: t.lo, card });
        out.codes.insert(r.clone(), t.domain.clone());
        ranges.insert(t.domain.clone(), (r, t.lo));
    }
    let reduced: BTreeMap<String, String> = ts.iter().map(|t| (t.array.clone(), ranges[&t.domain].0.clone())).collect();

    // Existence constraints are redundant when every key has a label.
    out.constraints.retain(|c| !ts.iter().any(|t| t.lo == 1 && is_existence(c, t)));

    let reindex = |ix: &mut Vec<String>| {
        for d in ix.iter_mut() {
            if let Some((r, _)) = ranges.get(d.as_str()) {
                *d = r.clone();
            }
        }
    };
    let mut decls = prelude;
    for d in out.decls.drain(..) {
        decls.push(match d {
            Decl::Bool { name, mut index } if reduced.contains_key(&name) => {
                index.pop();
                reindex(&mut index);
                let range = reduced[&name].clone();
                out.reduced.insert(name.clone(), range.clone());
                Decl::Int { name, index, range }
            }
            Decl::Bool { name, mut index } => {
                reindex(&mut index);
                Decl::Bool { name, index }
            }
            Decl::Int { name, mut index, range } => {
                reindex(&mut index);
                Decl::Int { name, index, range }
            }
            Decl::Known { name, mut index } => {
                reindex(&mut index);
                Decl::Known { name, index }
            }
            other => other,
        });
    }
    out.decls = decls;
    for d in &out.decls {
        if let Some(ix) = d.index() {
            out.relations.insert(d.name().to_string(), ix.to_vec());
        }
    }

    for c in &mut out.constraints {
        rebind(&mut c.bindings, &mut c.guards, &ranges);
        c.guards = std::mem::take(&mut c.guards).into_iter().map(|g| rewrite(g, &reduced, &ranges)).collect();
        c.lhs = rewrite(std::mem::replace(&mut c.lhs, Term::Int(0)), &reduced, &ranges);
        c.rhs = rewrite(std::mem::replace(&mut c.rhs, Term::Int(0)), &reduced, &ranges);
    }
    if let Some(o) = &mut out.objective {
        o.term = rewrite(o.term.clone(), &reduced, &ranges);
    }

    let co = Coerce { m: &out };
    let mut constraints = Vec::new();
    for c in &out.constraints {
        let mut env = co.env_of(&c.bindings);
        let mut c = c.clone();
        c.guards = c.guards.into_iter().map(|g| co.walk(g, &mut env)).collect();
        c.lhs = co.walk(c.lhs, &mut env);
        c.rhs = co.walk(c.rhs, &mut env);
        constraints.push(c);
    }
    let objective = out.objective.clone().map(|mut o| {
        o.term = co.walk(o.term, &mut Vec::new());
        o
    });
    out.constraints = constraints;
    out.objective = objective;
    out
}

/// Domain constant of a code, given the extent order.
pub fn decode_value(extent: &[Value], code: i64) -> Option<&Value> {
    if code < 1 {
        return None;
    }
    extent.get(code as usize - 1)
}
