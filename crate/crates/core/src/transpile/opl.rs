use std::fmt::Write;

use super::model::{print_constraint, print_decl, print_objective, ConstraintModel, Decl};
use crate::fixpoint::{self, Interpretation};
use crate::frontend::{Database, Schema, Value, INTEGER};

fn plain(v: &Value) -> String {
    match v {
        Value::Int(i) => i.to_string(),
        Value::Sym(s) => s.clone(),
    }
}

fn set_of(vals: impl IntoIterator<Item = String>) -> String {
    let v: Vec<String> = vals.into_iter().collect();
    format!("{{{}}}", v.join(", "))
}

/// Data declarations: one set per domain and per unary base relation, a
/// tuple type and tuple set per wider relation.
pub fn emit_data(schema: &Schema, db: &Database) -> String {
    let db = db.with_derived(schema);
    let mut out = String::new();
    for d in schema.all_domains() {
        if d == INTEGER {
            if let Some((lo, hi)) = schema.int_range {
                let _ = writeln!(out, "{{int}} {INTEGER} = asSet({lo}..{hi});");
            }
            continue;
        }
        let ty = if schema.is_int_domain(&d) { "int" } else { "string" };
        let _ = writeln!(out, "{{{ty}}} {d} = {};", set_of(db.extent(&d).iter().map(plain)));
    }
    for (p, sig) in &schema.predicates {
        let rows = db.relation(p).cloned().unwrap_or_default();
        if sig.len() == 1 {
            let ty = if schema.is_int_domain(&sig[0]) { "int" } else { "string" };
            let _ = writeln!(out, "{{{ty}}} {p} = {};", set_of(rows.iter().map(|t| plain(&t[0]))));
            continue;
        }
        let fields: Vec<String> = sig
            .iter()
            .enumerate()
            .map(|(i, d)| format!("{} a{};", if schema.is_int_domain(d) { "int" } else { "string" }, i + 1))
            .collect();
        let _ = writeln!(out, "tuple {p}_type {{{}}};", fields.join(" "));
        let tuples = rows.iter().map(|t| format!("<{}>", t.iter().map(plain).collect::<Vec<_>>().join(",")));
        let _ = writeln!(out, "{{{p}_type}} {p} = {};", set_of(tuples));
    }
    out
}

/// Index values of one array dimension: a domain extent, or the codes of
/// a declared range together with the constant each code stands for.
fn dimension(model: &ConstraintModel, db: &Database, name: &str) -> Vec<Option<Value>> {
    match model.range_bounds(name) {
        Some((lo, dom)) => {
            let ext = db.extent(dom);
            (lo..=ext.len() as i64).map(|k| if k == 0 { None } else { Some(ext[k as usize - 1].clone()) }).collect()
        }
        None => db.extent(name).iter().cloned().map(Some).collect(),
    }
}

fn initializer(
    model: &ConstraintModel,
    db: &Database,
    known: &Interpretation,
    pred: &str,
    index: &[String],
    prefix: &mut Vec<Option<Value>>,
) -> String {
    if prefix.len() == index.len() {
        let t: Option<Vec<Value>> = prefix.iter().cloned().collect();
        let hit = t.is_some_and(|t| fixpoint::contains(known, pred, &t));
        return if hit { "1" } else { "0" }.to_string();
    }
    let mut parts = Vec::new();
    for v in dimension(model, db, &index[prefix.len()]) {
        prefix.push(v);
        parts.push(initializer(model, db, known, pred, index, prefix));
        prefix.pop();
    }
    format!("[{}]", parts.join(", "))
}

/// Full OPL text: data section, declarations (known arrays initialized
/// from `known`), objective, and the constraint block.
pub fn emit_opl(model: &ConstraintModel, schema: &Schema, db: &Database, known: &Interpretation) -> String {
    let full = db.with_derived(schema);
    let mut out = emit_data(schema, db);
    for d in &model.decls {
        match d {
            Decl::Known { name, index } if !index.is_empty() => {
                let init = initializer(model, &full, known, name, index, &mut Vec::new());
                let _ = writeln!(out, "int {name}[{}] = {init};", index.join(","));
            }
            Decl::Known { name, .. } => {
                let v = if known.get(name).is_some_and(|s| !s.is_empty()) { 1 } else { 0 };
                let _ = writeln!(out, "int {name} = {v};");
            }
            other => {
                out.push_str(&print_decl(other));
                out.push('\n');
            }
        }
    }
    if let Some(o) = &model.objective {
        out.push_str(&print_objective(o));
        out.push('\n');
    }
    out.push_str("subject to {\n");
    for c in &model.constraints {
        let _ = writeln!(out, "  {}", print_constraint(c));
    }
    out.push_str("};\n");
    out
}
