use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::analysis::{stratify, AnalysisError};
use crate::frontend::{ArithOp, Atom, Expr, Literal, Rule, Schema, Term, Value};

fn value(v: &Value) -> String {
    match v {
        Value::Int(i) => i.to_string(),
        Value::Sym(s) => format!("\"{s}\""),
    }
}

struct Body<'a> {
    schema: &'a Schema,
    idb: &'a BTreeSet<String>,
    bound: BTreeMap<String, String>,
    headers: Vec<String>,
    conds: Vec<String>,
    iter: usize,
}

impl Body<'_> {
    fn term(&self, t: &Term) -> String {
        match t {
            Term::Var(v) => self.bound.get(v).cloned().unwrap_or_else(|| v.to_lowercase()),
            Term::Const(c) => value(c),
        }
    }

    fn expr(&self, e: &Expr) -> String {
        match e {
            Expr::Var(v) => self.bound.get(v).cloned().unwrap_or_else(|| v.to_lowercase()),
            Expr::Const(c) => value(c),
            Expr::Bin(op, a, b) => {
                let wrap = |x: &Expr| match x {
                    Expr::Bin(..) => format!("({})", self.expr(x)),
                    _ => self.expr(x),
                };
                let sym = match op {
                    ArithOp::Add => "+",
                    ArithOp::Sub => "-",
                    ArithOp::Mul => "*",
                };
                format!("{} {sym} {}", wrap(a), wrap(b))
            }
        }
    }

    fn cell(&self, a: &Atom) -> String {
        let mut s = a.pred.clone();
        for t in &a.args {
            let _ = write!(s, "[{}]", self.term(t));
        }
        s
    }

    fn loop_over(&mut self, v: &str, domain: &str) {
        let name = v.to_lowercase();
        self.headers.push(format!("for (var {name} in {domain})"));
        self.bound.insert(v.to_string(), name);
    }

    fn bind_free(&mut self, a: &Atom) {
        let sig = self.schema.signature(&a.pred).unwrap_or_default();
        for (t, d) in a.args.iter().zip(sig) {
            if let Term::Var(v) = t {
                if !self.bound.contains_key(v) {
                    self.loop_over(v, &d);
                }
            }
        }
    }

    fn positive(&mut self, a: &Atom) {
        if self.idb.contains(&a.pred) {
            self.bind_free(a);
            self.conds.push(format!("{} == 1", self.cell(a)));
        } else if a.args.len() == 1 {
            match &a.args[0] {
                Term::Var(v) if !self.bound.contains_key(v) => self.loop_over(v, &a.pred),
                t => self.conds.push(format!("{} in {}", self.term(t), a.pred)),
            }
        } else {
            self.iter += 1;
            let it = format!("e{}", self.iter);
            self.headers.push(format!("for (var {it} in {})", a.pred));
            for (i, t) in a.args.iter().enumerate() {
                let field = format!("{it}.a{}", i + 1);
                match t {
                    Term::Var(v) if !self.bound.contains_key(v) => {
                        self.bound.insert(v.clone(), field);
                    }
                    t => self.conds.push(format!("{field} == {}", self.term(t))),
                }
            }
        }
    }

    fn negative(&mut self, a: &Atom) {
        if self.idb.contains(&a.pred) {
            self.conds.push(format!("(1 - {}) == 1", self.cell(a)));
        } else {
            let args: Vec<String> = a.args.iter().map(|t| self.term(t)).collect();
            let tuple = if args.len() == 1 { args[0].clone() } else { format!("<{}>", args.join(",")) };
            self.conds.push(format!("!({tuple} in {})", a.pred));
        }
    }
}

/// Loop nest for one disjunct; `recursive` adds the novelty test and the
/// `modified` flag.
fn rule_block(out: &mut String, indent: usize, head: &Atom, conj: &[Literal], b: &mut Body, recursive: bool) {
    for l in conj {
        if let Literal::Pos(a) = l {
            if !b.idb.contains(&a.pred) {
                b.positive(a);
            }
        }
    }
    for l in conj {
        if let Literal::Pos(a) = l {
            if b.idb.contains(&a.pred) {
                b.positive(a);
            }
        }
    }
    for l in conj {
        match l {
            Literal::Neg(a) => b.negative(a),
            Literal::Cmp(op, x, y) => {
                // An equality binding a fresh variable becomes an assignment.
                if let (crate::frontend::CmpOp::Eq, Expr::Var(v)) = (op, x) {
                    if !b.bound.contains_key(v) && !head_has(head, v) {
                        let s = b.expr(y);
                        b.headers.push(format!("var {} = {s};", v.to_lowercase()));
                        b.bound.insert(v.clone(), v.to_lowercase());
                        continue;
                    }
                }
                let pending = [x, y].iter().any(|e| {
                    let mut vs = Vec::new();
                    e.vars(&mut vs);
                    vs.iter().any(|v| !b.bound.contains_key(v))
                });
                if pending {
                    let mut vs = Vec::new();
                    x.vars(&mut vs);
                    y.vars(&mut vs);
                    let sig = b.schema.signature(&head.pred).unwrap_or_default();
                    for v in vs {
                        if b.bound.contains_key(&v) {
                            continue;
                        }
                        let pos = head.args.iter().position(|t| matches!(t, Term::Var(w) if *w == v));
                        let dom = pos
                            .and_then(|i| sig.get(i).cloned())
                            .unwrap_or_else(|| crate::frontend::INTEGER.to_string());
                        b.loop_over(&v, &dom);
                    }
                }
                let sym = match op {
                    crate::frontend::CmpOp::Eq => "==",
                    other => other.symbol(),
                };
                b.conds.push(format!("{} {sym} {}", b.expr(x), b.expr(y)));
            }
            Literal::Pos(_) => {}
        }
    }
    let sig = b.schema.signature(&head.pred).unwrap_or_default();
    for (t, d) in head.args.iter().zip(sig) {
        if let Term::Var(v) = t {
            if !b.bound.contains_key(v) {
                b.loop_over(v, &d);
            }
        }
    }
    let target = b.cell(head);
    if recursive {
        b.conds.push(format!("{target} == 0"));
    }

    let pad = |n: usize| "  ".repeat(n);
    let mut depth = indent;
    let n = b.headers.len();
    for (i, h) in b.headers.iter().enumerate() {
        let brace = b.conds.is_empty() && i + 1 == n && !h.starts_with("var ");
        let _ = writeln!(out, "{}{h}{}", pad(depth), if brace { " {" } else { "" });
        if !h.starts_with("var ") {
            depth += 1;
        }
    }
    let mut closing = Vec::new();
    if !b.conds.is_empty() {
        let _ = writeln!(out, "{}if ({}) {{", pad(depth), b.conds.join(" & "));
        closing.push(depth);
        depth += 1;
    } else if n > 0 && !b.headers[n - 1].starts_with("var ") {
        closing.push(depth - 1);
    }
    let _ = writeln!(out, "{}{target} = 1;", pad(depth));
    if recursive {
        let _ = writeln!(out, "{}modified = true;", pad(depth));
    }
    for d in closing {
        let _ = writeln!(out, "{}}}", pad(d));
    }
}

fn head_has(h: &Atom, v: &str) -> bool {
    h.args.iter().any(|t| matches!(t, Term::Var(w) if w == v))
}

/// OPL script computing the least model of stratified rules by naive
/// iteration: one integer array per predicate, exit rules as plain loops,
/// recursive rules inside a `while (modified)` block, stratum by stratum.
pub fn emit_fixp_script(rules: &[Rule], schema: &Schema) -> Result<String, AnalysisError> {
    let strata = stratify(rules)?;
    let mut idb: Vec<String> = Vec::new();
    for r in strata.iter().flatten() {
        if !idb.contains(&r.head[0].pred) {
            idb.push(r.head[0].pred.clone());
        }
    }
    let mut out = String::new();
    for p in &idb {
        let sig = schema.signature(p).unwrap_or_default();
        let dims: String = sig.iter().map(|d| format!("[{d}]")).collect();
        let _ = writeln!(out, "// {p} declaration");
        let _ = writeln!(out, "int {p}{dims};");
    }
    if strata.is_empty() {
        return Ok(out);
    }
    let idb_set: BTreeSet<String> = idb.iter().cloned().collect();
    out.push_str("execute {\n");
    let mut declared = false;
    for stratum in &strata {
        let own: BTreeSet<&str> = stratum.iter().map(|r| r.head[0].pred.as_str()).collect();
        let is_rec = |conj: &[Literal]| conj.iter().any(|l| l.atom().is_some_and(|a| own.contains(a.pred.as_str())));
        // Disjuncts split individually: an extended rule may mix exit and
        // recursive bodies.
        let mut rec: Vec<(&Atom, &[Literal])> = Vec::new();
        for r in stratum {
            for conj in &r.body {
                if is_rec(conj) {
                    rec.push((&r.head[0], conj));
                    continue;
                }
                out.push_str("  // exit rule\n");
                let mut b = Body {
                    schema,
                    idb: &idb_set,
                    bound: BTreeMap::new(),
                    headers: Vec::new(),
                    conds: Vec::new(),
                    iter: 0,
                };
                rule_block(&mut out, 1, &r.head[0], conj, &mut b, false);
            }
        }
        if rec.is_empty() {
            continue;
        }
        out.push_str("  // recursive rule\n");
        out.push_str(if declared { "  modified = true;\n" } else { "  var modified = true;\n" });
        declared = true;
        out.push_str("  while (modified) {\n    modified = false;\n");
        for (head, conj) in rec {
            let mut b =
                Body { schema, idb: &idb_set, bound: BTreeMap::new(), headers: Vec::new(), conds: Vec::new(), iter: 0 };
            rule_block(&mut out, 2, head, conj, &mut b, true);
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    Ok(out)
}
