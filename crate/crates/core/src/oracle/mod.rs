//! Reference semantics: rewrite guesses and constraints into plain rules
//! with unstratified negation, then enumerate stable models by brute force.
//! Never used on the solving path.

mod direct;
mod stable;

use std::collections::BTreeSet;

use crate::fixpoint::Interpretation;
use crate::frontend::{
    Atom, CmpOp, Database, Expr, Goal, GoalMode, Literal, Program, Rule, RuleKind, Term, Tuple, Value,
};

pub use direct::guess_and_check;
pub use stable::{enumerate_stable_models, ground, is_stable, GroundProgram};

/// Default cap on choice atoms.
pub const DEFAULT_BOUND: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("{0} choice atoms exceed the oracle bound of {1}")]
    BoundExceeded(usize, usize),
    #[error("{0}")]
    Analysis(#[from] crate::analysis::AnalysisError),
}

/// Goal projection: tuples of the goal predicate that match the goal atom.
pub type Answer = BTreeSet<Tuple>;

fn fresh(base: &str, k: &mut usize) -> String {
    *k += 1;
    format!("{base}__st{k}")
}

fn vars_of(atoms: &[&Atom]) -> Vec<String> {
    let mut out = Vec::new();
    for a in atoms {
        a.vars(&mut out);
    }
    out
}

/// Plain rules (standard and 0-ary marker rules) with the same stable
/// models as the input once projected to its predicates.
pub fn st_transform(p: &Program) -> Program {
    let mut k = 0;
    let mut rules = Vec::new();
    for r in &p.rules {
        match r.kind {
            RuleKind::Standard => {
                for conj in &r.body {
                    rules.push(Rule::standard(r.head[0].clone(), conj.clone()));
                }
            }
            RuleKind::Partition => {
                let body = r.conj();
                for (j, h) in r.head.iter().enumerate() {
                    let mut conj = body.clone();
                    for (i, other) in r.head.iter().enumerate() {
                        if i != j {
                            conj.push(Literal::Neg(other.clone()));
                        }
                    }
                    rules.push(Rule::standard(h.clone(), conj));
                }
            }
            RuleKind::Subset => {
                let h = &r.head[0];
                let comp = Atom::new(fresh(&h.pred, &mut k), h.args.clone());
                let body = r.conj();
                let mut a = body.clone();
                a.push(Literal::Neg(comp.clone()));
                rules.push(Rule::standard(h.clone(), a));
                let mut b = body.clone();
                b.push(Literal::Neg(h.clone()));
                rules.push(Rule::standard(comp, b));
            }
            RuleKind::GeneralizedPartition => {
                let h = &r.head[0];
                let body = r.conj();
                let label = r.label.clone().unwrap_or_else(|| "L".to_string());
                let mut used: BTreeSet<String> = vars_of(&[h]).into_iter().collect();
                used.extend(crate::frontend::conj_vars(body));
                let mut pick = |base: &str| {
                    let mut i = 1;
                    loop {
                        let v = format!("{base}{i}");
                        if used.insert(v.clone()) {
                            return v;
                        }
                        i += 1;
                    }
                };
                let other = pick(&label);
                let (l1, l2) = (pick(&label), pick(&label));
                let diff = Atom::new(fresh(&format!("diff_{}", h.pred), &mut k), h.args.clone());
                let with_label = |v: &str| {
                    let mut a = h.clone();
                    let n = a.args.len();
                    a.args[n - 1] = Term::Var(v.to_string());
                    a
                };
                let ne = |a: &str, b: &str| Literal::Cmp(CmpOp::Ne, Expr::Var(a.into()), Expr::Var(b.into()));

                let mut c1 = body.clone();
                c1.push(Literal::Neg(diff.clone()));
                rules.push(Rule::standard(h.clone(), c1));

                let mut c2 = body.clone();
                c2.push(Literal::Pos(with_label(&other)));
                c2.push(ne(&other, &label));
                rules.push(Rule::standard(diff, c2));

                let mut c3 = body.clone();
                c3.push(Literal::Pos(with_label(&l1)));
                c3.push(Literal::Pos(with_label(&l2)));
                c3.push(ne(&l1, &l2));
                rules.push(marker_rule(c3, &mut k));
            }
            RuleKind::Constraint => {
                for conj in &r.body {
                    rules.push(marker_rule(conj.clone(), &mut k));
                }
            }
        }
    }
    Program { rules, goal: p.goal.clone() }
}

/// `c :- body, not c` with a fresh 0-ary `c`.
fn marker_rule(mut body: Vec<Literal>, k: &mut usize) -> Rule {
    let c = Atom::new(fresh("c", k), Vec::new());
    body.push(Literal::Neg(c.clone()));
    Rule::standard(c, body)
}

/// Tuples of the goal predicate in `m` that match the goal atom's
/// constants and repeated variables.
pub fn project(m: &Interpretation, goal: &Atom) -> Answer {
    let Some(ts) = m.get(&goal.pred) else { return Answer::new() };
    ts.iter().filter(|t| matches_goal(goal, t)).cloned().collect()
}

pub fn matches_goal(goal: &Atom, t: &[Value]) -> bool {
    if goal.args.len() != t.len() {
        return false;
    }
    let mut seen: Vec<(&str, &Value)> = Vec::new();
    for (a, v) in goal.args.iter().zip(t) {
        match a {
            Term::Const(c) if c != v => return false,
            Term::Var(x) => {
                if let Some((_, w)) = seen.iter().find(|(y, _)| y == x) {
                    if *w != v {
                        return false;
                    }
                } else {
                    seen.push((x, v));
                }
            }
            _ => {}
        }
    }
    true
}

/// Projects every model onto the goal; Min/Max keep only answers of
/// optimal cardinality.
pub fn answers_from_models(models: &[Interpretation], goal: &Goal) -> BTreeSet<Answer> {
    let all: BTreeSet<Answer> = models.iter().map(|m| project(m, &goal.atom)).collect();
    let best = match goal.mode {
        GoalMode::Plain => return all,
        GoalMode::Min => all.iter().map(|a| a.len()).min(),
        GoalMode::Max => all.iter().map(|a| a.len()).max(),
    };
    all.into_iter().filter(|a| Some(a.len()) == best).collect()
}

/// Answer set of a query through the rewrite and stable-model enumeration.
pub fn oracle_answer(p: &Program, db: &Database, bound: usize) -> Result<BTreeSet<Answer>, OracleError> {
    let goal = p.goal.clone();
    let st = st_transform(p);
    let models = enumerate_stable_models(&st.rules, db, bound)?;
    Ok(match goal {
        Some(g) => answers_from_models(&models, &g),
        None => BTreeSet::new(),
    })
}

/// Drops the predicates introduced by `st_transform`.
pub fn strip_auxiliary(m: &Interpretation) -> Interpretation {
    m.iter().filter(|(p, _)| !p.contains("__st")).map(|(p, t)| (p.clone(), t.clone())).collect()
}
