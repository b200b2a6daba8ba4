use super::factors;
use crate::frontend::{ArithOp, CmpOp};
use crate::transpile::{Constraint, ConstraintKind, ConstraintModel, Term};

/// Value of a closed term built from integer constants.
pub fn const_value(t: &Term) -> Option<i64> {
    match t {
        Term::Int(i) => Some(*i),
        Term::Bool(b) => Some(*b as i64),
        Term::Product(ts) => {
            // A zero factor decides the product even next to unknowns.
            let vals: Vec<Option<i64>> = ts.iter().map(const_value).collect();
            if vals.contains(&Some(0)) {
                return Some(0);
            }
            vals.into_iter().try_fold(1i64, |acc, v| v.map(|v| acc.saturating_mul(v)))
        }
        Term::Add(ts) => ts.iter().try_fold(0i64, |acc, x| const_value(x).map(|v| acc.saturating_add(v))),
        Term::Not(x) => const_value(x).map(|v| 1 - v),
        Term::Arith(op, a, b) => {
            let (a, b) = (const_value(a)?, const_value(b)?);
            Some(match op {
                ArithOp::Add => a.saturating_add(b),
                ArithOp::Sub => a.saturating_sub(b),
                ArithOp::Mul => a.saturating_mul(b),
            })
        }
        Term::Cmp(op, a, b) => Some(op.holds(&const_value(a)?, &const_value(b)?) as i64),
        _ => None,
    }
}

/// Built from variables and constants only: safe to evaluate while
/// enumerating bindings.
fn var_only(t: &Term) -> bool {
    let mut ok = true;
    t.visit(&mut |s| {
        if matches!(s, Term::Access { .. } | Term::Member { .. } | Term::Sum { .. }) {
            ok = false;
        }
    });
    ok
}

fn simplify_node(t: Term) -> Term {
    match t {
        Term::Product(ts) => {
            let mut out = Vec::new();
            for x in ts {
                match x {
                    Term::Product(inner) => out.extend(inner),
                    Term::Int(1) | Term::Bool(true) => {}
                    other => out.push(other),
                }
            }
            if out.iter().any(|x| matches!(x, Term::Int(0) | Term::Bool(false))) {
                return Term::Int(0);
            }
            Term::product(out)
        }
        Term::Add(ts) => {
            let out: Vec<Term> = ts.into_iter().filter(|x| !matches!(x, Term::Int(0) | Term::Bool(false))).collect();
            Term::add(out)
        }
        Term::Not(x) => match *x {
            Term::Int(v) => Term::Int(1 - v),
            other => Term::Not(Box::new(other)),
        },
        // (t > 0) > 0 is t > 0.
        Term::Cmp(CmpOp::Gt, a, zero)
            if *zero == Term::Int(0) && matches!(&*a, Term::Cmp(CmpOp::Gt, _, z) if **z == Term::Int(0)) =>
        {
            *a
        }
        Term::Sum { bindings, mut guards, body } => {
            let mut keep = Vec::new();
            for f in factors(&body) {
                if matches!(f, Term::Cmp(..)) && var_only(&f) {
                    guards.push(f);
                } else {
                    keep.push(f);
                }
            }
            Term::Sum { bindings, guards, body: Box::new(Term::product(keep)) }
        }
        other => other,
    }
}

fn simplify_term(t: Term) -> Term {
    t.map(&mut simplify_node)
}

fn simplify_constraint(mut c: Constraint) -> Option<Constraint> {
    c.lhs = simplify_term(c.lhs);
    c.rhs = simplify_term(c.rhs);
    c.guards = c.guards.into_iter().map(simplify_term).collect();
    match c.kind {
        ConstraintKind::Implies => {
            if const_value(&c.lhs) == Some(0) || const_value(&c.rhs).is_some_and(|v| v != 0) {
                return None;
            }
            if let Term::Cmp(CmpOp::Gt, body, zero) = &c.lhs {
                if **zero == Term::Int(0) {
                    let mut keep = Vec::new();
                    for f in factors(body) {
                        if matches!(f, Term::Cmp(..)) && var_only(&f) {
                            c.guards.push(f);
                        } else {
                            keep.push(f);
                        }
                    }
                    c.lhs = Term::gt0(Term::product(keep));
                }
            }
        }
        ConstraintKind::Iff => {
            if let (Some(a), Some(b)) = (const_value(&c.lhs), const_value(&c.rhs)) {
                if (a != 0) == (b != 0) {
                    return None;
                }
            }
        }
    }
    if c.guards.iter().any(|g| const_value(g) == Some(0)) {
        return None;
    }
    c.guards.retain(|g| const_value(g).is_none());
    Some(c)
}

pub fn pass_constraint_simplify(m: &ConstraintModel) -> ConstraintModel {
    let mut out = m.clone();
    loop {
        let before = out.constraints.clone();
        out.constraints = before.iter().cloned().filter_map(simplify_constraint).collect();
        if let Some(o) = &mut out.objective {
            o.term = simplify_term(o.term.clone());
        }
        if out.constraints == before {
            return out;
        }
    }
}
