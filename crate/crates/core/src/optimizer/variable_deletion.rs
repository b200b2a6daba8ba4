use super::factors;
use crate::frontend::CmpOp;
use crate::transpile::{Binding, Constraint, ConstraintKind, ConstraintModel, Decl, Term};

/// `A` from a factor `(A == v)` or `(v == A)`.
fn equated<'a>(f: &'a Term, v: &str) -> Option<&'a Term> {
    let Term::Cmp(CmpOp::Eq, a, b) = f else { return None };
    match (&**a, &**b) {
        (x, Term::Var(w)) if w == v && !x.mentions_var(v) => Some(x),
        (Term::Var(w), x) if w == v && !x.mentions_var(v) => Some(x),
        _ => None,
    }
}

fn in_range(m: &ConstraintModel, t: &Term, range: &str) -> bool {
    matches!(t, Term::Access { array, .. } if matches!(m.decl(array), Some(Decl::Int { range: r, .. }) if r == range))
}

/// For `forall(v in r) (A == v) * (B == v) * F > 0 => R` with `v` used
/// nowhere else and `A`, `B` ranging over `r`: `(A == B) * F > 0 => R`.
fn delete_one(m: &ConstraintModel, c: &mut Constraint) -> bool {
    if c.kind != ConstraintKind::Implies {
        return false;
    }
    let Term::Cmp(CmpOp::Gt, body, zero) = &c.lhs else { return false };
    if **zero != Term::Int(0) {
        return false;
    }
    let fs = factors(body);
    for (bi, b) in c.bindings.iter().enumerate() {
        let Binding::In { var, domain } = b else { continue };
        if !m.codes.contains_key(domain) || c.guards.iter().any(|g| g.mentions_var(var)) || c.rhs.mentions_var(var) {
            continue;
        }
        let mut hits = Vec::new();
        let mut elsewhere = false;
        for (i, f) in fs.iter().enumerate() {
            match equated(f, var) {
                Some(a) if in_range(m, a, domain) => hits.push((i, a.clone())),
                _ if f.mentions_var(var) => elsewhere = true,
                _ => {}
            }
        }
        if elsewhere || hits.len() < 2 {
            continue;
        }
        let first = hits[0].1.clone();
        let mut out = Vec::new();
        for (i, f) in fs.iter().enumerate() {
            match hits.iter().position(|(j, _)| *j == i) {
                Some(0) => {}
                Some(k) => out.push(Term::cmp(CmpOp::Eq, first.clone(), hits[k].1.clone())),
                None => out.push(f.clone()),
            }
        }
        c.lhs = Term::gt0(Term::product(out));
        c.bindings.remove(bi);
        return true;
    }
    false
}

fn used_vars(c: &Constraint) -> Vec<String> {
    let mut out = Vec::new();
    for t in c.terms() {
        t.free_vars(&mut out);
    }
    out
}

pub fn pass_variable_deletion(m: &ConstraintModel) -> ConstraintModel {
    let mut out = m.clone();
    for c in &mut out.constraints {
        while delete_one(m, c) {}
        let used = used_vars(c);
        c.bindings.retain(|b| match b {
            Binding::In { var, .. } => used.contains(var),
            Binding::Tuple { .. } => true,
        });
    }
    out
}
