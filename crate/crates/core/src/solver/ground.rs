use std::collections::HashMap;

use indexmap::IndexMap;

use super::SolveError;
use crate::fixpoint::{self, Interpretation};
use crate::frontend::{ArithOp, CmpOp, Database, Value};
use crate::transpile::{Binding, ConstraintKind, ConstraintModel, Decl, Sense, Term};

/// Ground arithmetic over decision cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GTerm {
    Const(i64),
    Cell(usize),
    Add(Vec<GTerm>),
    Mul(Vec<GTerm>),
    Sub(Box<GTerm>, Box<GTerm>),
    Cmp(CmpOp, Box<GTerm>, Box<GTerm>),
}

impl GTerm {
    pub fn cells(&self, out: &mut Vec<usize>) {
        match self {
            GTerm::Const(_) => {}
            GTerm::Cell(c) => {
                if !out.contains(c) {
                    out.push(*c);
                }
            }
            GTerm::Add(ts) | GTerm::Mul(ts) => ts.iter().for_each(|t| t.cells(out)),
            GTerm::Sub(a, b) | GTerm::Cmp(_, a, b) => {
                a.cells(out);
                b.cells(out);
            }
        }
    }

    /// Exact value under a total assignment.
    pub fn eval(&self, vals: &[i64]) -> i64 {
        match self {
            GTerm::Const(c) => *c,
            GTerm::Cell(i) => vals[*i],
            GTerm::Add(ts) => ts.iter().map(|t| t.eval(vals)).sum(),
            GTerm::Mul(ts) => ts.iter().map(|t| t.eval(vals)).product(),
            GTerm::Sub(a, b) => a.eval(vals) - b.eval(vals),
            GTerm::Cmp(op, a, b) => op.holds(&a.eval(vals), &b.eval(vals)) as i64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundConstraint {
    pub kind: ConstraintKind,
    pub lhs: GTerm,
    pub rhs: GTerm,
    pub cells: Vec<usize>,
}

impl GroundConstraint {
    pub fn holds(&self, vals: &[i64]) -> bool {
        let (l, r) = (self.lhs.eval(vals) != 0, self.rhs.eval(vals) != 0);
        match self.kind {
            ConstraintKind::Implies => !l || r,
            ConstraintKind::Iff => l == r,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub array: String,
    /// Index values; integer codes along reduced dimensions.
    pub key: Vec<Value>,
    pub lo: i64,
    pub hi: i64,
}

/// Index dimensions of a decision array, and the code range of its
/// values when it is an integer array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrayInfo {
    pub index: Vec<String>,
    pub range: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct GroundModel {
    pub cells: Vec<Cell>,
    pub constraints: Vec<GroundConstraint>,
    pub objective: Option<(Sense, GTerm)>,
    /// Set when some constraint folded to false.
    pub unsat: bool,
    pub arrays: IndexMap<String, ArrayInfo>,
    /// Domain each code range stands for, with its extent.
    pub codes: IndexMap<String, Vec<Value>>,
    lookup: HashMap<(String, Vec<Value>), usize>,
}

impl GroundModel {
    pub fn cell(&self, array: &str, key: &[Value]) -> Option<usize> {
        self.lookup.get(&(array.to_string(), key.to_vec())).copied()
    }

    /// Every constraint holds under `vals`.
    pub fn check(&self, vals: &[i64]) -> bool {
        !self.unsat && self.constraints.iter().all(|c| c.holds(vals))
    }

    pub fn objective_value(&self, vals: &[i64]) -> Option<i64> {
        self.objective.as_ref().map(|(_, t)| t.eval(vals))
    }
}

/// Ground value: a database constant, or an expression over cells.
#[derive(Debug, Clone, PartialEq, Eq)]
enum GV {
    Val(Value),
    Expr(GTerm),
}

impl GV {
    fn int(i: i64) -> GV {
        GV::Val(Value::Int(i))
    }

    fn into_term(self) -> Result<GTerm, SolveError> {
        match self {
            GV::Val(Value::Int(i)) => Ok(GTerm::Const(i)),
            GV::Val(Value::Sym(s)) => Err(SolveError::Unsupported(format!("symbol `{s}` in arithmetic"))),
            GV::Expr(e) => Ok(e),
        }
    }
}

type Env = Vec<(String, Value)>;

fn lookup_var<'e>(env: &'e Env, v: &str) -> Option<&'e Value> {
    env.iter().rev().find(|(x, _)| x == v).map(|(_, val)| val)
}

/// Sentinel for a code with no constant; matches nothing in the data.
fn no_value() -> Value {
    Value::Sym(String::from("\u{0}"))
}

struct Grounder<'a> {
    m: &'a ConstraintModel,
    db: &'a Database,
    known: &'a Interpretation,
    g: GroundModel,
}

impl Grounder<'_> {
    /// Values a dimension ranges over: a domain extent or range codes.
    fn dimension(&self, name: &str) -> Result<Vec<Value>, SolveError> {
        if let Some((lo, dom)) = self.m.range_bounds(name) {
            let n = self.db.extent(dom).len() as i64;
            return Ok((lo..=n).map(Value::Int).collect());
        }
        if self.db.extents.contains_key(name) {
            return Ok(self.db.extent(name).to_vec());
        }
        if let Some(r) = self.db.relation(name) {
            if r.iter().all(|t| t.len() == 1) {
                return Ok(r.iter().map(|t| t[0].clone()).collect());
            }
        }
        Err(SolveError::UndefinedDomain(name.to_string()))
    }

    /// Database value behind an index position.
    fn plain_index(&self, dim: &str, v: &Value) -> Option<Value> {
        match self.m.range_bounds(dim) {
            Some((_, dom)) => {
                let k = v.as_int()?;
                if k < 1 {
                    return None;
                }
                self.db.extent(dom).get(k as usize - 1).cloned()
            }
            None => Some(v.clone()),
        }
    }

    fn bind_rec(
        &mut self,
        bs: &[Binding],
        guards: &[Term],
        env: &mut Env,
        f: &mut dyn FnMut(&mut Self, &mut Env) -> Result<(), SolveError>,
    ) -> Result<(), SolveError> {
        let Some((first, rest)) = bs.split_first() else {
            for g in guards {
                match self.term(g, env)? {
                    GV::Val(Value::Int(0)) => return Ok(()),
                    GV::Val(_) => {}
                    GV::Expr(_) => return Err(SolveError::Unsupported("guard depends on decision cells".into())),
                }
            }
            return f(self, env);
        };
        match first {
            Binding::In { var, domain } => {
                for v in self.dimension(domain)? {
                    env.push((var.clone(), v));
                    let r = self.bind_rec(rest, guards, env, f);
                    env.pop();
                    r?;
                }
            }
            Binding::Tuple { vars, relation } => {
                let rows: Vec<Vec<Value>> = self
                    .db
                    .relation(relation)
                    .ok_or_else(|| SolveError::UndefinedDomain(relation.clone()))?
                    .iter()
                    .cloned()
                    .collect();
                for t in rows {
                    let n = env.len();
                    env.extend(vars.iter().cloned().zip(t));
                    let r = self.bind_rec(rest, guards, env, f);
                    env.truncate(n);
                    r?;
                }
            }
        }
        Ok(())
    }

    fn term(&mut self, t: &Term, env: &mut Env) -> Result<GV, SolveError> {
        Ok(match t {
            Term::Int(i) => GV::int(*i),
            Term::Sym(s) => GV::Val(Value::Sym(s.clone())),
            Term::Bool(b) => GV::int(*b as i64),
            Term::Var(v) => GV::Val(
                lookup_var(env, v)
                    .cloned()
                    .ok_or_else(|| SolveError::Unsupported(format!("unbound variable `{v}`")))?,
            ),
            Term::Access { array, args } => {
                let key = self.values(args, env)?;
                match self.m.decl(array) {
                    Some(d) if d.is_decision() => match self.g.cell(array, &key) {
                        Some(c) => GV::Expr(GTerm::Cell(c)),
                        None => GV::int(0),
                    },
                    Some(Decl::Known { index, .. }) => {
                        let tuple: Option<Vec<Value>> =
                            index.iter().zip(&key).map(|(d, v)| self.plain_index(d, v)).collect();
                        GV::int(tuple.is_some_and(|t| fixpoint::contains(self.known, array, &t)) as i64)
                    }
                    _ => return Err(SolveError::Unsupported(format!("undeclared array `{array}`"))),
                }
            }
            Term::Member { relation, args } => {
                let key = self.values(args, env)?;
                GV::int(self.db.holds(relation, &key) as i64)
            }
            Term::Sum { bindings, guards, body } => {
                let mut parts: Vec<GTerm> = Vec::new();
                let mut total = 0i64;
                self.bind_rec(bindings, guards, env, &mut |me, env| {
                    match me.term(body, env)? {
                        GV::Val(v) => {
                            total += v.as_int().ok_or_else(|| SolveError::Unsupported("symbol summed".into()))?
                        }
                        GV::Expr(e) => parts.push(e),
                    }
                    Ok(())
                })?;
                if parts.is_empty() {
                    GV::int(total)
                } else {
                    if total != 0 {
                        parts.push(GTerm::Const(total));
                    }
                    GV::Expr(if parts.len() == 1 { parts.pop().unwrap_or(GTerm::Const(0)) } else { GTerm::Add(parts) })
                }
            }
            Term::Product(ts) => {
                let mut parts = Vec::new();
                let mut k = 1i64;
                for x in ts {
                    match self.term(x, env)? {
                        GV::Val(v) => {
                            k *= v.as_int().ok_or_else(|| SolveError::Unsupported("symbol multiplied".into()))?;
                            if k == 0 {
                                return Ok(GV::int(0));
                            }
                        }
                        GV::Expr(e) => parts.push(e),
                    }
                }
                if parts.is_empty() {
                    GV::int(k)
                } else {
                    if k != 1 {
                        parts.push(GTerm::Const(k));
                    }
                    GV::Expr(if parts.len() == 1 { parts.pop().unwrap_or(GTerm::Const(1)) } else { GTerm::Mul(parts) })
                }
            }
            Term::Add(ts) => {
                let mut parts = Vec::new();
                let mut k = 0i64;
                for x in ts {
                    match self.term(x, env)? {
                        GV::Val(v) => k += v.as_int().ok_or_else(|| SolveError::Unsupported("symbol added".into()))?,
                        GV::Expr(e) => parts.push(e),
                    }
                }
                if parts.is_empty() {
                    GV::int(k)
                } else {
                    if k != 0 {
                        parts.push(GTerm::Const(k));
                    }
                    GV::Expr(if parts.len() == 1 { parts.pop().unwrap_or(GTerm::Const(0)) } else { GTerm::Add(parts) })
                }
            }
            Term::Not(x) => match self.term(x, env)? {
                GV::Val(v) => GV::int(1 - v.as_int().unwrap_or(0)),
                GV::Expr(e) => GV::Expr(GTerm::Sub(Box::new(GTerm::Const(1)), Box::new(e))),
            },
            Term::Arith(op, a, b) => {
                let (a, b) = (self.term(a, env)?, self.term(b, env)?);
                match (a, b) {
                    (GV::Val(Value::Int(x)), GV::Val(Value::Int(y))) => GV::int(match op {
                        ArithOp::Add => x.saturating_add(y),
                        ArithOp::Sub => x.saturating_sub(y),
                        ArithOp::Mul => x.saturating_mul(y),
                    }),
                    (a, b) => {
                        let (a, b) = (a.into_term()?, b.into_term()?);
                        GV::Expr(match op {
                            ArithOp::Add => GTerm::Add(vec![a, b]),
                            ArithOp::Sub => GTerm::Sub(Box::new(a), Box::new(b)),
                            ArithOp::Mul => GTerm::Mul(vec![a, b]),
                        })
                    }
                }
            }
            Term::Cmp(op, a, b) => {
                let (a, b) = (self.term(a, env)?, self.term(b, env)?);
                match (a, b) {
                    (GV::Val(x), GV::Val(y)) => GV::int(compare(*op, &x, &y) as i64),
                    (a, b) => GV::Expr(GTerm::Cmp(*op, Box::new(a.into_term()?), Box::new(b.into_term()?))),
                }
            }
            Term::Encode { domain, term } => match self.term(term, env)? {
                GV::Val(v) => GV::int(self.db.extent(domain).iter().position(|x| *x == v).map_or(-1, |p| p as i64 + 1)),
                GV::Expr(_) => return Err(SolveError::Unsupported("encoding a decision value".into())),
            },
            Term::Decode { domain, term } => match self.term(term, env)? {
                GV::Val(Value::Int(k)) if k >= 1 => {
                    GV::Val(self.db.extent(domain).get(k as usize - 1).cloned().unwrap_or_else(no_value))
                }
                GV::Val(_) => GV::Val(no_value()),
                GV::Expr(_) => return Err(SolveError::Unsupported("decoding a decision value".into())),
            },
        })
    }

    fn values(&mut self, args: &[Term], env: &mut Env) -> Result<Vec<Value>, SolveError> {
        args.iter()
            .map(|a| match self.term(a, env)? {
                GV::Val(v) => Ok(v),
                GV::Expr(_) => Err(SolveError::Unsupported("index depends on decision cells".into())),
            })
            .collect()
    }
}

/// Same comparison semantics as rule evaluation: integers and symbols
/// compare within their kind; values of different kinds are only unequal.
fn compare(op: CmpOp, a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => op.holds(x, y),
        (Value::Sym(x), Value::Sym(y)) => op.holds(x, y),
        _ => op == CmpOp::Ne,
    }
}

fn cartesian(dims: &[Vec<Value>]) -> Vec<Vec<Value>> {
    let mut out: Vec<Vec<Value>> = vec![Vec::new()];
    for d in dims {
        let mut next = Vec::with_capacity(out.len() * d.len());
        for prefix in &out {
            for v in d {
                let mut t = prefix.clone();
                t.push(v.clone());
                next.push(t);
            }
        }
        out = next;
    }
    out
}

fn truth(t: &GTerm) -> Option<bool> {
    match t {
        GTerm::Const(c) => Some(*c != 0),
        _ => None,
    }
}

/// Expands every forall and sum over `db`; `db` must already carry the
/// extents of derived domains, `known` the values of known arrays.
pub fn ground(m: &ConstraintModel, db: &Database, known: &Interpretation) -> Result<GroundModel, SolveError> {
    let mut gr = Grounder { m, db, known, g: GroundModel::default() };
    for (r, d) in &m.codes {
        gr.g.codes.insert(r.clone(), db.extent(d).to_vec());
    }
    for d in &m.decls {
        let (name, index, range) = match d {
            Decl::Bool { name, index } => (name, index, None),
            Decl::Int { name, index, range } => (name, index, Some(range.clone())),
            _ => continue,
        };
        let (lo, hi) = match &range {
            None => (0, 1),
            Some(r) => {
                let (lo, dom) = m.range_bounds(r).ok_or_else(|| SolveError::UndefinedDomain(r.clone()))?;
                let hi = db.extent(dom).len() as i64;
                if hi < lo {
                    return Err(SolveError::EmptyRange(r.clone()));
                }
                (lo, hi)
            }
        };
        let dims = index.iter().map(|i| gr.dimension(i)).collect::<Result<Vec<_>, _>>()?;
        for key in cartesian(&dims) {
            let id = gr.g.cells.len();
            gr.g.lookup.insert((name.clone(), key.clone()), id);
            gr.g.cells.push(Cell { array: name.clone(), key, lo, hi });
        }
        gr.g.arrays.insert(name.clone(), ArrayInfo { index: index.clone(), range });
    }

    let mut constraints = Vec::new();
    let mut unsat = false;
    for c in &m.constraints {
        let mut env = Env::new();
        gr.bind_rec(&c.bindings, &c.guards, &mut env, &mut |me, env| {
            let lhs = me.term(&c.lhs, env)?.into_term()?;
            let rhs = me.term(&c.rhs, env)?.into_term()?;
            let (l, r) = (truth(&lhs), truth(&rhs));
            let trivially = match c.kind {
                ConstraintKind::Implies => l == Some(false) || r == Some(true),
                ConstraintKind::Iff => l.is_some() && l == r,
            };
            if trivially {
                return Ok(());
            }
            let mut cells = Vec::new();
            lhs.cells(&mut cells);
            rhs.cells(&mut cells);
            if cells.is_empty() {
                unsat = true;
            }
            constraints.push(GroundConstraint { kind: c.kind, lhs, rhs, cells });
            Ok(())
        })?;
    }
    gr.g.constraints = constraints;
    gr.g.unsat = unsat;
    if let Some(o) = &m.objective {
        let t = gr.term(&o.term, &mut Env::new())?.into_term()?;
        gr.g.objective = Some((o.sense, t));
    }
    Ok(gr.g)
}
