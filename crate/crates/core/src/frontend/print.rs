use std::fmt::Write;

use super::*;

pub fn print_term(t: &Term) -> String {
    match t {
        Term::Var(v) => v.clone(),
        Term::Const(c) => c.to_string(),
    }
}

pub fn print_atom(a: &Atom) -> String {
    if a.args.is_empty() {
        return a.pred.clone();
    }
    let args: Vec<String> = a.args.iter().map(print_term).collect();
    format!("{}({})", a.pred, args.join(", "))
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(op, ..) => op.precedence(),
        _ => 3,
    }
}

pub fn print_expr(e: &Expr) -> String {
    match e {
        Expr::Var(v) => v.clone(),
        Expr::Const(c) => c.to_string(),
        Expr::Bin(op, l, r) => {
            let p = op.precedence();
            let ls = if prec(l) < p { format!("({})", print_expr(l)) } else { print_expr(l) };
            let rs = if prec(r) <= p { format!("({})", print_expr(r)) } else { print_expr(r) };
            format!("{ls} {} {rs}", op.symbol())
        }
    }
}

pub fn print_literal(l: &Literal) -> String {
    match l {
        Literal::Pos(a) => print_atom(a),
        Literal::Neg(a) => format!("not {}", print_atom(a)),
        Literal::Cmp(op, a, b) => format!("{} {} {}", print_expr(a), op.symbol(), print_expr(b)),
    }
}

fn print_body(body: &[Conj]) -> String {
    body.iter().map(|c| c.iter().map(print_literal).collect::<Vec<_>>().join(", ")).collect::<Vec<_>>().join("; ")
}

pub fn print_rule(r: &Rule) -> String {
    let body = print_body(&r.body);
    match r.kind {
        RuleKind::Standard => {
            if r.body.len() == 1 && r.body[0].is_empty() {
                format!("{}.", print_atom(&r.head[0]))
            } else {
                format!("{} :- {body}.", print_atom(&r.head[0]))
            }
        }
        RuleKind::Subset => format!("{} <~ {body}.", print_atom(&r.head[0])),
        RuleKind::Partition => {
            let heads: Vec<String> = r.head.iter().map(print_atom).collect();
            format!("{} :- {body}.", heads.join(" (+) "))
        }
        RuleKind::GeneralizedPartition => {
            format!("(+)[{}] {} :- {body}.", r.label.as_deref().unwrap_or("L"), print_atom(&r.head[0]))
        }
        RuleKind::Constraint => format!(":- {body}."),
    }
}

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for r in &p.rules {
        out.push_str(&print_rule(r));
        out.push('\n');
    }
    if let Some(g) = &p.goal {
        let a = print_atom(&g.atom);
        let _ = match g.mode {
            GoalMode::Plain => writeln!(out, "? {a}."),
            GoalMode::Min => writeln!(out, "? min |{a}|."),
            GoalMode::Max => writeln!(out, "? max |{a}|."),
        };
    }
    out
}
