use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;

use super::model::{Binding, Constraint, ConstraintKind, ConstraintModel, Decl, Objective, Sense, Term};
use super::TranspileError;
use crate::analysis::ComponentPartition;
use crate::frontend::{Atom, Expr, GoalMode, Literal, Program, Rule, RuleKind, Schema, Value};

/// Names visible to one translation: which predicates are arrays and what
/// the lowercased variable names must avoid.
pub struct Scope<'a> {
    pub schema: &'a Schema,
    pub arrays: BTreeSet<String>,
    reserved: BTreeSet<String>,
}

impl<'a> Scope<'a> {
    pub fn new(schema: &'a Schema, arrays: BTreeSet<String>) -> Scope<'a> {
        let mut reserved: BTreeSet<String> = schema.all_domains().into_iter().collect();
        reserved.extend(schema.predicates.keys().cloned());
        reserved.extend(schema.idb.keys().cloned());
        Scope { schema, arrays, reserved }
    }

    pub fn var(&self, v: &str) -> String {
        let mut s = v.to_lowercase();
        while self.reserved.contains(&s) {
            s.push('_');
        }
        s
    }

    fn value(v: &Value) -> Term {
        match v {
            Value::Int(i) => Term::Int(*i),
            Value::Sym(s) => Term::Sym(s.clone()),
        }
    }

    fn arg(&self, t: &crate::frontend::Term) -> Term {
        match t {
            crate::frontend::Term::Var(v) => Term::Var(self.var(v)),
            crate::frontend::Term::Const(c) => Self::value(c),
        }
    }

    pub fn expr(&self, e: &Expr) -> Term {
        match e {
            Expr::Var(v) => Term::Var(self.var(v)),
            Expr::Const(c) => Self::value(c),
            Expr::Bin(op, a, b) => Term::Arith(*op, Box::new(self.expr(a)), Box::new(self.expr(b))),
        }
    }

    /// Membership test for EDB atoms, array cell for IDB atoms.
    pub fn atom(&self, a: &Atom) -> Term {
        let args: Vec<Term> = a.args.iter().map(|t| self.arg(t)).collect();
        if self.arrays.contains(&a.pred) {
            Term::Access { array: a.pred.clone(), args }
        } else {
            Term::Member { relation: a.pred.clone(), args }
        }
    }

    pub fn literal(&self, l: &Literal) -> Term {
        match l {
            Literal::Pos(a) => self.atom(a),
            Literal::Neg(a) => Term::Not(Box::new(self.atom(a))),
            Literal::Cmp(op, a, b) => Term::cmp(*op, self.expr(a), self.expr(b)),
        }
    }

    /// Product of the literal translations.
    pub fn conj(&self, conj: &[Literal]) -> Term {
        Term::product(conj.iter().map(|l| self.literal(l)).collect())
    }

    /// Domain of each variable from its first positive occurrence.
    pub fn var_domains(&self, conj: &[Literal]) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        for l in conj {
            let Literal::Pos(a) = l else { continue };
            let Some(sig) = self.schema.signature(&a.pred) else { continue };
            for (t, d) in a.args.iter().zip(sig) {
                if let crate::frontend::Term::Var(v) = t {
                    out.entry(v.clone()).or_insert(d);
                }
            }
        }
        out
    }

    /// `conj` with the variables outside `free` summed out.
    pub fn exists(&self, conj: &[Literal], free: &[String]) -> Result<Term, TranspileError> {
        let doms = self.var_domains(conj);
        let mut bindings = Vec::new();
        for v in crate::frontend::conj_vars(conj) {
            if free.contains(&v) {
                continue;
            }
            let d = doms.get(&v).ok_or_else(|| TranspileError::UnboundVariable(v.clone()))?;
            bindings.push(Binding::In { var: self.var(&v), domain: d.clone() });
        }
        let body = self.conj(conj);
        Ok(if bindings.is_empty() { body } else { Term::Sum { bindings, guards: Vec::new(), body: Box::new(body) } })
    }

    fn head_bindings(&self, h: &Atom) -> Result<(Vec<Binding>, Vec<Term>), TranspileError> {
        let sig = self.signature(&h.pred)?;
        let mut bindings = Vec::new();
        let mut args = Vec::new();
        for (t, d) in h.args.iter().zip(sig) {
            if let crate::frontend::Term::Var(v) = t {
                let b = Binding::In { var: self.var(v), domain: d };
                if !bindings.contains(&b) {
                    bindings.push(b);
                }
            }
            args.push(self.arg(t));
        }
        Ok((bindings, args))
    }

    fn signature(&self, p: &str) -> Result<Vec<String>, TranspileError> {
        self.schema.signature(p).ok_or_else(|| TranspileError::MissingSignature(p.to_string()))
    }
}

fn head_var_names(h: &Atom) -> Vec<String> {
    let mut out = Vec::new();
    h.vars(&mut out);
    out
}

/// Existence and support constraints of a generalized partition rule. The
/// last body literal is the label domain atom.
pub fn translate_generalized_partition(r: &Rule, sc: &Scope) -> Result<Vec<Constraint>, TranspileError> {
    let h = &r.head[0];
    let conj = r.conj();
    let (label_atom, body) = match conj.split_last() {
        Some((Literal::Pos(d), rest)) => (d, rest),
        _ => return Err(TranspileError::Shape("generalized partition rule without a label domain".into())),
    };
    let n = h.args.len();
    let key = Atom::new(h.pred.clone(), h.args[..n - 1].to_vec());
    let (key_bindings, key_args) = sc.head_bindings_with(&key, &sc.signature(&h.pred)?[..n - 1])?;
    let label = match &h.args[n - 1] {
        crate::frontend::Term::Var(v) => sc.var(v),
        _ => return Err(TranspileError::Shape("constant partition label".into())),
    };
    let domain = label_atom.pred.clone();
    let free = head_var_names(h);
    let bt = sc.exists(body, &free)?;

    let mut cell = key_args.clone();
    cell.push(Term::Var(label.clone()));
    let access = Term::Access { array: h.pred.clone(), args: cell };
    let exist = Constraint {
        bindings: key_bindings.clone(),
        guards: Vec::new(),
        kind: ConstraintKind::Implies,
        lhs: Term::gt0(bt.clone()),
        rhs: Term::cmp(
            crate::frontend::CmpOp::Eq,
            Term::Sum {
                bindings: vec![Binding::In { var: label.clone(), domain: domain.clone() }],
                guards: Vec::new(),
                body: Box::new(access.clone()),
            },
            Term::Int(1),
        ),
    };
    let mut support_bindings = key_bindings;
    support_bindings.push(Binding::In { var: label, domain });
    let support = Constraint {
        bindings: support_bindings,
        guards: Vec::new(),
        kind: ConstraintKind::Implies,
        lhs: Term::gt0(access),
        rhs: Term::gt0(bt),
    };
    Ok(vec![exist, support])
}

impl Scope<'_> {
    fn head_bindings_with(&self, h: &Atom, sig: &[String]) -> Result<(Vec<Binding>, Vec<Term>), TranspileError> {
        let mut bindings = Vec::new();
        let mut args = Vec::new();
        for (t, d) in h.args.iter().zip(sig) {
            if let crate::frontend::Term::Var(v) = t {
                let b = Binding::In { var: self.var(v), domain: d.clone() };
                if !bindings.contains(&b) {
                    bindings.push(b);
                }
            }
            args.push(self.arg(t));
        }
        Ok((bindings, args))
    }
}

/// Support constraint of a subset rule.
pub fn translate_subset(r: &Rule, sc: &Scope) -> Result<Vec<Constraint>, TranspileError> {
    let h = &r.head[0];
    let (bindings, args) = sc.head_bindings(h)?;
    let bt = sc.exists(r.conj(), &head_var_names(h))?;
    Ok(vec![Constraint {
        bindings,
        guards: Vec::new(),
        kind: ConstraintKind::Implies,
        lhs: Term::gt0(Term::Access { array: h.pred.clone(), args }),
        rhs: Term::gt0(bt),
    }])
}

/// `p[X] > 0 <=> TP(B1) + ... + TP(Bn) > 0`.
pub fn translate_standard(r: &Rule, sc: &Scope) -> Result<Vec<Constraint>, TranspileError> {
    let h = &r.head[0];
    let (bindings, args) = sc.head_bindings(h)?;
    let free = head_var_names(h);
    let disjuncts = r.body.iter().map(|c| sc.exists(c, &free)).collect::<Result<Vec<_>, _>>()?;
    Ok(vec![Constraint {
        bindings,
        guards: Vec::new(),
        kind: ConstraintKind::Iff,
        lhs: Term::gt0(Term::Access { array: h.pred.clone(), args }),
        rhs: Term::gt0(Term::add(disjuncts)),
    }])
}

/// Constraint `:- B, not A1, ..., not Ak` read as `A1 | ... | Ak <- B`.
pub fn translate_constraint(r: &Rule, sc: &Scope) -> Result<Vec<Constraint>, TranspileError> {
    let mut out = Vec::new();
    for conj in &r.body {
        let doms = sc.var_domains(conj);
        let mut bindings = Vec::new();
        for v in crate::frontend::conj_vars(conj) {
            let d = doms.get(&v).ok_or_else(|| TranspileError::UnboundVariable(v.clone()))?;
            bindings.push(Binding::In { var: sc.var(&v), domain: d.clone() });
        }
        let b: Vec<Literal> = conj.iter().filter(|l| !matches!(l, Literal::Neg(_))).cloned().collect();
        let a: Vec<Term> = conj
            .iter()
            .filter_map(|l| match l {
                Literal::Neg(a) => Some(sc.atom(a)),
                _ => None,
            })
            .collect();
        let rhs = if a.is_empty() { Term::Bool(false) } else { Term::gt0(Term::add(a)) };
        out.push(Constraint {
            bindings,
            guards: Vec::new(),
            kind: ConstraintKind::Implies,
            lhs: Term::gt0(sc.conj(&b)),
            rhs,
        });
    }
    Ok(out)
}

pub fn translate_rule(r: &Rule, sc: &Scope) -> Result<Vec<Constraint>, TranspileError> {
    match r.kind {
        RuleKind::GeneralizedPartition => translate_generalized_partition(r, sc),
        RuleKind::Subset => translate_subset(r, sc),
        RuleKind::Standard => translate_standard(r, sc),
        RuleKind::Constraint => translate_constraint(r, sc),
        RuleKind::Partition => Err(TranspileError::Shape("partition rule left after normalization".into())),
    }
}

/// Objective of a Min/Max goal: the cardinality of the goal relation.
pub fn translate_goal(p: &Program, sc: &Scope) -> Result<Option<Objective>, TranspileError> {
    let Some(g) = &p.goal else { return Ok(None) };
    let sense = match g.mode {
        GoalMode::Plain => return Ok(None),
        GoalMode::Min => Sense::Minimize,
        GoalMode::Max => Sense::Maximize,
    };
    if !sc.arrays.contains(&g.atom.pred) {
        return Err(TranspileError::GoalOutsideP2(g.atom.pred.clone()));
    }
    let (bindings, args) = sc.head_bindings(&g.atom)?;
    let body = Term::Access { array: g.atom.pred.clone(), args };
    let term =
        if bindings.is_empty() { body } else { Term::Sum { bindings, guards: Vec::new(), body: Box::new(body) } };
    Ok(Some(Objective { sense, term }))
}

/// P1 predicates read by the P2 rules; their values are fixed before
/// solving.
pub fn known_predicates(part: &ComponentPartition) -> Vec<String> {
    let p1: Vec<&str> = part.p1.iter().flat_map(|r| r.defined()).collect();
    let mut out: Vec<String> = Vec::new();
    for r in part.p2_g.iter().chain(&part.p2_s).chain(&part.p2_c) {
        for l in r.body_literals() {
            if let Some(a) = l.atom() {
                if p1.contains(&a.pred.as_str()) && !out.contains(&a.pred) {
                    out.push(a.pred.clone());
                }
            }
        }
    }
    out
}

/// Declarations, objective, and constraints of the P2 part of a
/// normalized program.
pub fn assemble_model(
    p: &Program,
    part: &ComponentPartition,
    schema: &Schema,
) -> Result<ConstraintModel, TranspileError> {
    let mut decls = Vec::new();
    let mut arrays = BTreeSet::new();
    for r in part.p2_g.iter().chain(&part.p2_s) {
        for h in r.defined() {
            if arrays.insert(h.to_string()) {
                let index = schema.signature(h).ok_or_else(|| TranspileError::MissingSignature(h.to_string()))?;
                decls.push(Decl::Bool { name: h.to_string(), index });
            }
        }
    }
    // Order decision arrays as the rules define them in the program.
    let order: Vec<String> = p.idb();
    decls.sort_by_key(|d| order.iter().position(|q| q == d.name()).unwrap_or(usize::MAX));
    for k in known_predicates(part) {
        let index = schema.signature(&k).ok_or_else(|| TranspileError::MissingSignature(k.clone()))?;
        arrays.insert(k.clone());
        decls.push(Decl::Known { name: k, index });
    }

    let sc = Scope::new(schema, arrays);
    let mut constraints = Vec::new();
    for r in part.p2_g.iter().chain(&part.p2_s).chain(&part.p2_c) {
        constraints.extend(translate_rule(r, &sc)?);
    }
    let objective = translate_goal(p, &sc)?;

    let mut relations: IndexMap<String, Vec<String>> = IndexMap::new();
    for d in schema.all_domains() {
        relations.insert(d.clone(), vec![d]);
    }
    for (p, sig) in &schema.predicates {
        relations.insert(p.clone(), sig.clone());
    }
    for d in &decls {
        if let Some(ix) = d.index() {
            relations.insert(d.name().to_string(), ix.to_vec());
        }
    }
    Ok(ConstraintModel { decls, objective, constraints, relations, codes: IndexMap::new(), reduced: IndexMap::new() })
}
