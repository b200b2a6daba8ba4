//! Syntax trees and the three file formats: `.nps` schema, `.npd` program
//! plus query, `.npf` facts.

mod lexer;
mod parser;
mod print;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use indexmap::IndexMap;

pub use parser::{parse_database, parse_program, parse_query, parse_schema};
pub use print::{print_atom, print_expr, print_literal, print_program, print_rule, print_term};

/// Name of the builtin integer-range domain.
pub const INTEGER: &str = "integer";

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum FrontendError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("duplicate domain `{0}`")]
    DuplicateDomain(String),
    #[error("duplicate predicate `{0}`")]
    DuplicatePredicate(String),
    #[error("predicate `{pred}` uses undeclared domain `{domain}`")]
    UndeclaredDomain { pred: String, domain: String },
    #[error("MinInt {0} exceeds MaxInt {1}")]
    BadRange(i64, i64),
    #[error("fact `{0}`: unknown predicate")]
    UnknownFact(String),
    #[error("fact `{pred}`: expected {expected} arguments, got {got}")]
    Arity { pred: String, expected: usize, got: usize },
    #[error("fact `{pred}`: constant `{value}` is not in domain `{domain}`")]
    OutsideDomain { pred: String, value: Value, domain: String },
    #[error("domain `{domain}`: `{value}` is not an integer")]
    NotInteger { domain: String, value: Value },
    #[error("program has no query line")]
    MissingQuery,
}

/// A constant. Integers order before symbols.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Sym(String),
}

impl Value {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            Value::Sym(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Sym(s) => f.write_str(s),
        }
    }
}

pub type Tuple = Vec<Value>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    Const(Value),
}

impl Term {
    pub fn var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
        }
    }

    pub fn precedence(self) -> u8 {
        match self {
            ArithOp::Add | ArithOp::Sub => 1,
            ArithOp::Mul => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Var(String),
    Const(Value),
    Bin(ArithOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Expr::Const(_) => {}
            Expr::Bin(_, a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }
}

impl From<&Term> for Expr {
    fn from(t: &Term) -> Expr {
        match t {
            Term::Var(v) => Expr::Var(v.clone()),
            Term::Const(c) => Expr::Const(c.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn holds<T: Ord>(self, a: &T, b: &T) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: impl Into<String>, args: Vec<Term>) -> Atom {
        Atom { pred: pred.into(), args }
    }

    pub fn vars(&self, out: &mut Vec<String>) {
        for a in &self.args {
            if let Term::Var(v) = a {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Literal {
    Pos(Atom),
    Neg(Atom),
    Cmp(CmpOp, Expr, Expr),
}

impl Literal {
    pub fn atom(&self) -> Option<&Atom> {
        match self {
            Literal::Pos(a) | Literal::Neg(a) => Some(a),
            Literal::Cmp(..) => None,
        }
    }

    pub fn vars(&self, out: &mut Vec<String>) {
        match self {
            Literal::Pos(a) | Literal::Neg(a) => a.vars(out),
            Literal::Cmp(_, l, r) => {
                l.vars(out);
                r.vars(out);
            }
        }
    }
}

pub type Conj = Vec<Literal>;

/// Variables of a conjunction in order of first occurrence.
pub fn conj_vars(conj: &[Literal]) -> Vec<String> {
    let mut out = Vec::new();
    for l in conj {
        l.vars(&mut out);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleKind {
    Standard,
    Partition,
    GeneralizedPartition,
    Subset,
    Constraint,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub kind: RuleKind,
    pub head: Vec<Atom>,
    /// Disjunction of conjunctions. A fact has a single empty conjunction.
    pub body: Vec<Conj>,
    /// Partition variable of a generalized partition rule.
    pub label: Option<String>,
}

impl Rule {
    pub fn standard(head: Atom, body: Conj) -> Rule {
        Rule { kind: RuleKind::Standard, head: vec![head], body: vec![body], label: None }
    }

    pub fn constraint(body: Conj) -> Rule {
        Rule { kind: RuleKind::Constraint, head: Vec::new(), body: vec![body], label: None }
    }

    pub fn is_guess(&self) -> bool {
        matches!(self.kind, RuleKind::Partition | RuleKind::GeneralizedPartition | RuleKind::Subset)
    }

    /// Predicates defined by this rule, deduplicated, in head order.
    pub fn defined(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for a in &self.head {
            if !out.contains(&a.pred.as_str()) {
                out.push(&a.pred);
            }
        }
        out
    }

    pub fn body_literals(&self) -> impl Iterator<Item = &Literal> {
        self.body.iter().flatten()
    }

    /// The single conjunction of a non-extended rule.
    pub fn conj(&self) -> &Conj {
        &self.body[0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GoalMode {
    Plain,
    Min,
    Max,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Goal {
    pub mode: GoalMode,
    pub atom: Atom,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Program {
    pub rules: Vec<Rule>,
    pub goal: Option<Goal>,
}

impl Program {
    /// Predicates defined by some rule, in order of first definition.
    pub fn idb(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rules {
            for p in r.defined() {
                if !out.iter().any(|q| q == p) {
                    out.push(p.to_string());
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub program: Program,
    pub goal: Goal,
}

/// A derived domain built from declared ones during schema inference or
/// normalization.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DomainExpr {
    Named(String),
    Values(Vec<Value>),
    Union(Vec<DomainExpr>),
    Intersection(Vec<DomainExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schema {
    pub string_domains: Vec<String>,
    pub int_domains: Vec<String>,
    pub int_range: Option<(i64, i64)>,
    /// Base predicate signatures in declaration order.
    pub predicates: IndexMap<String, Vec<String>>,
    /// Fresh domains introduced by inference and normalization.
    pub derived_domains: IndexMap<String, DomainExpr>,
    /// Signatures of IDB predicates, filled by inference.
    pub idb: IndexMap<String, Vec<String>>,
}

impl Schema {
    pub fn is_declared_domain(&self, d: &str) -> bool {
        self.string_domains.iter().any(|x| x == d)
            || self.int_domains.iter().any(|x| x == d)
            || (d == INTEGER && self.int_range.is_some())
    }

    pub fn is_domain(&self, d: &str) -> bool {
        self.is_declared_domain(d) || self.derived_domains.contains_key(d)
    }

    pub fn is_base(&self, p: &str) -> bool {
        self.predicates.contains_key(p)
    }

    /// Domains and base predicates: everything the database supplies.
    pub fn is_edb(&self, p: &str) -> bool {
        self.is_base(p) || self.is_domain(p)
    }

    pub fn signature(&self, p: &str) -> Option<Vec<String>> {
        if let Some(s) = self.predicates.get(p).or_else(|| self.idb.get(p)) {
            return Some(s.clone());
        }
        if self.is_domain(p) {
            return Some(vec![p.to_string()]);
        }
        None
    }

    pub fn is_int_domain(&self, d: &str) -> bool {
        if d == INTEGER && self.int_range.is_some() {
            return true;
        }
        if self.int_domains.iter().any(|x| x == d) {
            return true;
        }
        match self.derived_domains.get(d) {
            Some(e) => self.expr_is_int(e),
            None => false,
        }
    }

    fn expr_is_int(&self, e: &DomainExpr) -> bool {
        match e {
            DomainExpr::Named(n) => self.is_int_domain(n),
            DomainExpr::Values(vs) => !vs.is_empty() && vs.iter().all(|v| v.as_int().is_some()),
            DomainExpr::Union(xs) => !xs.is_empty() && xs.iter().all(|x| self.expr_is_int(x)),
            DomainExpr::Intersection(xs) => xs.iter().any(|x| self.expr_is_int(x)),
        }
    }

    /// All domain names: declared string, declared int, `integer`, derived.
    pub fn all_domains(&self) -> Vec<String> {
        let mut out: Vec<String> = self.string_domains.clone();
        out.extend(self.int_domains.iter().cloned());
        if self.int_range.is_some() && !out.iter().any(|d| d == INTEGER) {
            out.push(INTEGER.to_string());
        }
        out.extend(self.derived_domains.keys().cloned());
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Database {
    pub extents: IndexMap<String, Vec<Value>>,
    pub facts: IndexMap<String, BTreeSet<Tuple>>,
    pub int_domains: BTreeSet<String>,
}

impl Database {
    pub fn extent(&self, d: &str) -> &[Value] {
        self.extents.get(d).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn relation(&self, p: &str) -> Option<&BTreeSet<Tuple>> {
        self.facts.get(p)
    }

    /// Tuple membership in a base relation or domain.
    pub fn holds(&self, p: &str, t: &[Value]) -> bool {
        if let Some(r) = self.facts.get(p) {
            return r.contains(t);
        }
        if let Some(e) = self.extents.get(p) {
            return t.len() == 1 && e.contains(&t[0]);
        }
        false
    }

    /// Evaluates every derived domain of `schema` into an extent.
    pub fn with_derived(&self, schema: &Schema) -> Database {
        let mut db = self.clone();
        for (name, e) in &schema.derived_domains {
            let vals = eval_domain(&db, e);
            if schema.is_int_domain(name) {
                db.int_domains.insert(name.clone());
            }
            db.extents.insert(name.clone(), vals);
        }
        db
    }

    /// Every fact and domain member as a ground atom.
    pub fn atoms(&self) -> BTreeMap<String, BTreeSet<Tuple>> {
        let mut out: BTreeMap<String, BTreeSet<Tuple>> = BTreeMap::new();
        for (d, vs) in &self.extents {
            let e = out.entry(d.clone()).or_default();
            for v in vs {
                e.insert(vec![v.clone()]);
            }
        }
        for (p, ts) in &self.facts {
            out.entry(p.clone()).or_default().extend(ts.iter().cloned());
        }
        out
    }

    /// Every constant occurring anywhere in the database.
    pub fn constants(&self) -> BTreeSet<Value> {
        let mut out = BTreeSet::new();
        for vs in self.extents.values() {
            out.extend(vs.iter().cloned());
        }
        for ts in self.facts.values() {
            for t in ts {
                out.extend(t.iter().cloned());
            }
        }
        out
    }
}

fn eval_domain(db: &Database, e: &DomainExpr) -> Vec<Value> {
    match e {
        DomainExpr::Named(n) => db.extent(n).to_vec(),
        DomainExpr::Values(vs) => {
            let mut out: Vec<Value> = Vec::new();
            for v in vs {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            out
        }
        DomainExpr::Union(xs) => {
            let mut out: Vec<Value> = Vec::new();
            for x in xs {
                for v in eval_domain(db, x) {
                    if !out.contains(&v) {
                        out.push(v);
                    }
                }
            }
            out
        }
        DomainExpr::Intersection(xs) => {
            let mut parts = xs.iter().map(|x| eval_domain(db, x));
            let first = parts.next().unwrap_or_default();
            let rest: Vec<Vec<Value>> = parts.collect();
            first.into_iter().filter(|v| rest.iter().all(|r| r.contains(v))).collect()
        }
    }
}
