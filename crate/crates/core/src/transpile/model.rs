use std::collections::BTreeSet;
use std::fmt::Write;

use indexmap::IndexMap;

use crate::frontend::{ArithOp, CmpOp};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Decl {
    /// `dvar boolean p[D1,...,Dk]`
    Bool { name: String, index: Vec<String> },
    /// `dvar int p[D1,...,Dk] in range`
    Int { name: String, index: Vec<String>, range: String },
    /// Array of values computed before solving (`int q[D1,...,Dm]`).
    Known { name: String, index: Vec<String> },
    /// `int name = card(domain)`
    Card { name: String, domain: String },
    /// `range name = lo..card`
    Range { name: String, lo: i64, card: String },
}

impl Decl {
    pub fn name(&self) -> &str {
        match self {
            Decl::Bool { name, .. }
            | Decl::Int { name, .. }
            | Decl::Known { name, .. }
            | Decl::Card { name, .. }
            | Decl::Range { name, .. } => name,
        }
    }

    pub fn index(&self) -> Option<&[String]> {
        match self {
            Decl::Bool { index, .. } | Decl::Int { index, .. } | Decl::Known { index, .. } => Some(index),
            _ => None,
        }
    }

    pub fn is_decision(&self) -> bool {
        matches!(self, Decl::Bool { .. } | Decl::Int { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Binding {
    /// `x in d`; `d` is a domain or a declared range.
    In { var: String, domain: String },
    /// `<x,y> in r` over a base relation.
    Tuple { vars: Vec<String>, relation: String },
}

impl Binding {
    pub fn vars(&self) -> Vec<&str> {
        match self {
            Binding::In { var, .. } => vec![var],
            Binding::Tuple { vars, .. } => vars.iter().map(|v| v.as_str()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Int(i64),
    Sym(String),
    Bool(bool),
    Var(String),
    /// Array cell.
    Access {
        array: String,
        args: Vec<Term>,
    },
    /// Membership of a tuple in a base relation or domain.
    Member {
        relation: String,
        args: Vec<Term>,
    },
    Sum {
        bindings: Vec<Binding>,
        guards: Vec<Term>,
        body: Box<Term>,
    },
    Product(Vec<Term>),
    Add(Vec<Term>),
    /// `(1 - t)`
    Not(Box<Term>),
    Arith(ArithOp, Box<Term>, Box<Term>),
    Cmp(CmpOp, Box<Term>, Box<Term>),
    /// Integer code of a domain constant.
    Encode {
        domain: String,
        term: Box<Term>,
    },
    /// Domain constant of an integer code.
    Decode {
        domain: String,
        term: Box<Term>,
    },
}

impl Term {
    pub fn cmp(op: CmpOp, a: Term, b: Term) -> Term {
        Term::Cmp(op, Box::new(a), Box::new(b))
    }

    pub fn gt0(t: Term) -> Term {
        Term::cmp(CmpOp::Gt, t, Term::Int(0))
    }

    /// Product with the empty case as 1 and the single case unwrapped.
    pub fn product(mut factors: Vec<Term>) -> Term {
        match factors.len() {
            0 => Term::Int(1),
            1 => factors.pop().unwrap_or(Term::Int(1)),
            _ => Term::Product(factors),
        }
    }

    pub fn add(mut terms: Vec<Term>) -> Term {
        match terms.len() {
            0 => Term::Int(0),
            1 => terms.pop().unwrap_or(Term::Int(0)),
            _ => Term::Add(terms),
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Term::Int(1) | Term::Bool(true))
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars(&self, out: &mut Vec<String>) {
        self.walk_free(&mut Vec::new(), out);
    }

    fn walk_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        let push = |v: &String, bound: &Vec<String>, out: &mut Vec<String>| {
            if !bound.contains(v) && !out.contains(v) {
                out.push(v.clone());
            }
        };
        match self {
            Term::Var(v) => push(v, bound, out),
            Term::Int(_) | Term::Sym(_) | Term::Bool(_) => {}
            Term::Access { args, .. } | Term::Member { args, .. } => {
                for a in args {
                    a.walk_free(bound, out);
                }
            }
            Term::Sum { bindings, guards, body } => {
                let n = bound.len();
                for b in bindings {
                    bound.extend(b.vars().into_iter().map(String::from));
                }
                for g in guards {
                    g.walk_free(bound, out);
                }
                body.walk_free(bound, out);
                bound.truncate(n);
            }
            Term::Product(ts) | Term::Add(ts) => {
                for t in ts {
                    t.walk_free(bound, out);
                }
            }
            Term::Not(t) | Term::Encode { term: t, .. } | Term::Decode { term: t, .. } => t.walk_free(bound, out),
            Term::Arith(_, a, b) | Term::Cmp(_, a, b) => {
                a.walk_free(bound, out);
                b.walk_free(bound, out);
            }
        }
    }

    /// Applies `f` bottom-up to every subterm.
    pub fn map(self, f: &mut dyn FnMut(Term) -> Term) -> Term {
        let t = match self {
            Term::Access { array, args } => Term::Access { array, args: args.into_iter().map(|a| a.map(f)).collect() },
            Term::Member { relation, args } => {
                Term::Member { relation, args: args.into_iter().map(|a| a.map(f)).collect() }
            }
            Term::Sum { bindings, guards, body } => Term::Sum {
                bindings,
                guards: guards.into_iter().map(|g| g.map(f)).collect(),
                body: Box::new(body.map(f)),
            },
            Term::Product(ts) => Term::Product(ts.into_iter().map(|t| t.map(f)).collect()),
            Term::Add(ts) => Term::Add(ts.into_iter().map(|t| t.map(f)).collect()),
            Term::Not(t) => Term::Not(Box::new(t.map(f))),
            Term::Arith(op, a, b) => Term::Arith(op, Box::new(a.map(f)), Box::new(b.map(f))),
            Term::Cmp(op, a, b) => Term::Cmp(op, Box::new(a.map(f)), Box::new(b.map(f))),
            Term::Encode { domain, term } => Term::Encode { domain, term: Box::new(term.map(f)) },
            Term::Decode { domain, term } => Term::Decode { domain, term: Box::new(term.map(f)) },
            leaf => leaf,
        };
        f(t)
    }

    /// Visits every subterm top-down.
    pub fn visit(&self, f: &mut dyn FnMut(&Term)) {
        f(self);
        match self {
            Term::Access { args, .. } | Term::Member { args, .. } => args.iter().for_each(|a| a.visit(f)),
            Term::Sum { guards, body, .. } => {
                guards.iter().for_each(|g| g.visit(f));
                body.visit(f);
            }
            Term::Product(ts) | Term::Add(ts) => ts.iter().for_each(|t| t.visit(f)),
            Term::Not(t) | Term::Encode { term: t, .. } | Term::Decode { term: t, .. } => t.visit(f),
            Term::Arith(_, a, b) | Term::Cmp(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    pub fn mentions_var(&self, v: &str) -> bool {
        let mut hit = false;
        self.visit(&mut |t| {
            if matches!(t, Term::Var(x) if x == v) {
                hit = true;
            }
        });
        hit
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    Implies,
    Iff,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub bindings: Vec<Binding>,
    pub guards: Vec<Term>,
    pub kind: ConstraintKind,
    pub lhs: Term,
    pub rhs: Term,
}

impl Constraint {
    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        self.guards.iter().chain([&self.lhs, &self.rhs])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Objective {
    pub sense: Sense,
    pub term: Term,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConstraintModel {
    pub decls: Vec<Decl>,
    pub objective: Option<Objective>,
    pub constraints: Vec<Constraint>,
    /// Column domains of base relations, domains, and arrays.
    pub relations: IndexMap<String, Vec<String>>,
    /// Integer range name -> the domain it codes.
    pub codes: IndexMap<String, String>,
    /// Reduced array -> its label range.
    pub reduced: IndexMap<String, String>,
}

impl ConstraintModel {
    pub fn decl(&self, name: &str) -> Option<&Decl> {
        self.decls.iter().find(|d| d.name() == name)
    }

    pub fn range_bounds(&self, name: &str) -> Option<(i64, &str)> {
        self.decls.iter().find_map(|d| match d {
            Decl::Range { name: n, lo, card } if n == name => {
                let dom = self.decls.iter().find_map(|c| match c {
                    Decl::Card { name: cn, domain } if cn == card => Some(domain.as_str()),
                    _ => None,
                })?;
                Some((*lo, dom))
            }
            _ => None,
        })
    }

    /// Checks accesses against declarations and that every variable is bound.
    pub fn validate(&self) -> Result<(), String> {
        let check_term = |t: &Term, bound: &[String]| -> Result<(), String> {
            let mut err = None;
            t.visit(&mut |s| {
                if let Term::Access { array, args } = s {
                    match self.decl(array).and_then(|d| d.index()) {
                        Some(ix) if ix.len() == args.len() => {}
                        Some(ix) => {
                            err.get_or_insert(format!(
                                "`{array}` has {} indices, accessed with {}",
                                ix.len(),
                                args.len()
                            ));
                        }
                        None => {
                            err.get_or_insert(format!("undeclared array `{array}`"));
                        }
                    }
                }
            });
            let mut free = Vec::new();
            t.free_vars(&mut free);
            if let Some(v) = free.iter().find(|v| !bound.contains(v)) {
                err.get_or_insert(format!("unbound variable `{v}`"));
            }
            err.map_or(Ok(()), Err)
        };
        for c in &self.constraints {
            let bound: Vec<String> = c.bindings.iter().flat_map(|b| b.vars()).map(String::from).collect();
            for t in c.terms() {
                check_term(t, &bound)?;
            }
        }
        if let Some(o) = &self.objective {
            check_term(&o.term, &[])?;
        }
        Ok(())
    }

    /// Arrays referenced anywhere in constraints or the objective.
    pub fn referenced_arrays(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut f = |t: &Term| {
            if let Term::Access { array, .. } = t {
                out.insert(array.clone());
            }
        };
        for c in &self.constraints {
            for t in c.terms() {
                t.visit(&mut f);
            }
        }
        if let Some(o) = &self.objective {
            o.term.visit(&mut f);
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Printing

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    Top,
    CmpArg,
    Factor,
    SumBody,
}

fn cmp_glyph(op: CmpOp) -> &'static str {
    match op {
        CmpOp::Eq => "==",
        other => other.symbol(),
    }
}

pub fn print_binding(b: &Binding) -> String {
    match b {
        Binding::In { var, domain } => format!("{var} in {domain}"),
        Binding::Tuple { vars, relation } => format!("<{}> in {relation}", vars.join(",")),
    }
}

pub fn print_bindings(bs: &[Binding], guards: &[Term]) -> String {
    let mut s = bs.iter().map(print_binding).collect::<Vec<_>>().join(", ");
    if !guards.is_empty() {
        let gs: Vec<String> = guards.iter().map(|g| fmt(g, Ctx::Top)).collect();
        let _ = write!(s, " : {}", gs.join(" && "));
    }
    s
}

fn arith_prec(t: &Term) -> u8 {
    match t {
        Term::Arith(op, ..) => op.precedence(),
        _ => 3,
    }
}

pub fn print_term(t: &Term) -> String {
    fmt(t, Ctx::Top)
}

fn fmt(t: &Term, ctx: Ctx) -> String {
    match t {
        Term::Int(i) => i.to_string(),
        Term::Sym(s) => format!("\"{s}\""),
        Term::Bool(b) => b.to_string(),
        Term::Var(v) => v.clone(),
        Term::Access { array, args } if args.is_empty() => array.clone(),
        Term::Access { array, args } => {
            let a: Vec<String> = args.iter().map(|x| fmt(x, Ctx::Top)).collect();
            format!("{array}[{}]", a.join(","))
        }
        Term::Member { relation, args } => {
            let a: Vec<String> = args.iter().map(|x| fmt(x, Ctx::Top)).collect();
            if a.len() == 1 {
                format!("(sum({} in {relation}) 1 > 0)", a[0])
            } else {
                format!("(sum(<{}> in {relation}) 1 > 0)", a.join(","))
            }
        }
        Term::Sum { bindings, guards, body } => {
            let s = format!("sum({}) {}", print_bindings(bindings, guards), fmt(body, Ctx::SumBody));
            if ctx == Ctx::CmpArg {
                s
            } else {
                format!("({s})")
            }
        }
        Term::Product(ts) => {
            let s = ts.iter().map(|x| fmt(x, Ctx::Factor)).collect::<Vec<_>>().join(" * ");
            if ctx == Ctx::CmpArg || ctx == Ctx::Top {
                s
            } else {
                format!("({s})")
            }
        }
        Term::Add(ts) => format!("({})", ts.iter().map(|x| fmt(x, Ctx::Factor)).collect::<Vec<_>>().join(" + ")),
        Term::Not(x) => format!("(1 - {})", fmt(x, Ctx::Factor)),
        Term::Arith(op, a, b) => {
            let p = op.precedence();
            let l = if arith_prec(a) < p { format!("({})", fmt(a, Ctx::Top)) } else { fmt(a, Ctx::Factor) };
            let r = if arith_prec(b) <= p { format!("({})", fmt(b, Ctx::Top)) } else { fmt(b, Ctx::Factor) };
            let s = format!("{l} {} {r}", op.symbol());
            if ctx == Ctx::Factor {
                format!("({s})")
            } else {
                s
            }
        }
        Term::Cmp(op, a, b) => {
            let s = format!("{} {} {}", fmt(a, Ctx::CmpArg), cmp_glyph(*op), fmt(b, Ctx::CmpArg));
            if ctx == Ctx::Top {
                s
            } else {
                format!("({s})")
            }
        }
        Term::Encode { domain, term } => format!("(ord({domain}, {}) + 1)", fmt(term, Ctx::Top)),
        Term::Decode { domain, term } => format!("item({domain}, {} - 1)", fmt(term, Ctx::Factor)),
    }
}

pub fn print_constraint(c: &Constraint) -> String {
    let glyph = match c.kind {
        ConstraintKind::Implies => "=>",
        ConstraintKind::Iff => "<=>",
    };
    let body = format!("{} {glyph} {}", fmt(&c.lhs, Ctx::Top), fmt(&c.rhs, Ctx::Top));
    if c.bindings.is_empty() && c.guards.is_empty() {
        format!("{body};")
    } else {
        format!("forall ({}) {body};", print_bindings(&c.bindings, &c.guards))
    }
}

pub fn print_decl(d: &Decl) -> String {
    match d {
        Decl::Bool { name, index } => format!("dvar boolean {name}{};", index_suffix(index)),
        Decl::Int { name, index, range } => format!("dvar int {name}{} in {range};", index_suffix(index)),
        Decl::Known { name, index } => format!("int {name}{};", index_suffix(index)),
        Decl::Card { name, domain } => format!("int {name} = card({domain});"),
        Decl::Range { name, lo, card } => format!("range {name} = {lo}..{card};"),
    }
}

fn index_suffix(index: &[String]) -> String {
    if index.is_empty() {
        String::new()
    } else {
        format!("[{}]", index.join(","))
    }
}

pub fn print_objective(o: &Objective) -> String {
    let kw = match o.sense {
        Sense::Minimize => "minimize",
        Sense::Maximize => "maximize",
    };
    // The objective is a bare sum, as in a comparison argument.
    format!("{kw} {};", fmt(&o.term, Ctx::CmpArg))
}

/// Model text without data: declarations, objective, constraint block.
pub fn print_model(m: &ConstraintModel) -> String {
    let mut out = String::new();
    for d in &m.decls {
        out.push_str(&print_decl(d));
        out.push('\n');
    }
    if let Some(o) = &m.objective {
        out.push_str(&print_objective(o));
        out.push('\n');
    }
    out.push_str("subject to {\n");
    for c in &m.constraints {
        out.push_str("  ");
        out.push_str(&print_constraint(c));
        out.push('\n');
    }
    out.push_str("};\n");
    out
}
