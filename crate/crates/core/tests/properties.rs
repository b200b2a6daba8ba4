mod common;

use std::collections::BTreeSet;

use common::Case;
use npdl::analysis::{infer_schemas, normalize};
use npdl::frontend::{parse_program, parse_schema, print_program, Literal};
use npdl::optimizer::PIPELINE;
use npdl::solver::{self, Limits, Mode};
use npdl::transpile::{print_model, Scope, Term};
use proptest::prelude::*;

const SCHEMA: &str = "DOMAINS: node; color.\nPREDICATES: edge(node,node); mark(node).\n";

fn term() -> impl Strategy<Value = String> {
    prop_oneof![
        prop::sample::select(vec!["X", "Y", "Z"]).prop_map(String::from),
        prop::sample::select(vec!["a", "b", "3"]).prop_map(String::from),
    ]
}

fn atom(preds: Vec<(&'static str, usize)>) -> impl Strategy<Value = String> {
    prop::sample::select(preds).prop_flat_map(|(p, n)| {
        prop::collection::vec(term(), n).prop_map(move |args| format!("{p}({})", args.join(",")))
    })
}

fn literal() -> impl Strategy<Value = String> {
    let base = vec![("edge", 2), ("mark", 1), ("p", 1), ("q", 2)];
    prop_oneof![
        3 => atom(base.clone()),
        1 => atom(base).prop_map(|a| format!("not {a}")),
        1 => (term(), prop::sample::select(vec!["=", "!=", "<", ">="]), term()).prop_map(|(a, op, b)| format!("{a} {op} {b}")),
    ]
}

fn body() -> impl Strategy<Value = String> {
    prop::collection::vec(literal(), 1..4).prop_map(|ls| ls.join(", "))
}

fn rule() -> impl Strategy<Value = String> {
    prop_oneof![
        (atom(vec![("p", 1), ("q", 2)]), prop::collection::vec(body(), 1..3))
            .prop_map(|(h, bs)| format!("{h} :- {}.", bs.join("; "))),
        body().prop_map(|b| format!(":- {b}.")),
        atom(vec![("s", 1)]).prop_map(|h| format!("{h} <~ mark(X).")),
        Just("(+)[C] col(X,C) :- mark(X), color(C).".to_string()),
        Just("a(X) (+) b(X) :- node(X).".to_string()),
    ]
}

/// Safe program: every rule guards its variables with node atoms.
fn safe_program() -> impl Strategy<Value = String> {
    let head = prop::sample::select(vec!["p(X)", "r(X)", "t(X)"]);
    let lit = prop::sample::select(vec!["edge(X,Y)", "mark(X)", "not mark(Y)", "X != Y", "edge(Y,X)", "not edge(X,Y)"]);
    let r = (head, prop::collection::vec(lit, 0..3)).prop_map(|(h, ls)| {
        let mut body = vec!["node(X)".to_string(), "node(Y)".to_string()];
        body.extend(ls.into_iter().map(String::from));
        format!("{h} :- {}.", body.join(", "))
    });
    prop::collection::vec(r, 1..5).prop_map(|rs| rs.join("\n"))
}

fn graph_facts() -> impl Strategy<Value = String> {
    (1usize..=4).prop_flat_map(|n| {
        prop::collection::vec(any::<bool>(), n * n).prop_map(move |bits| {
            let mut s: String = (1..=n).map(|i| format!("node(n{i}). ")).collect();
            for (k, b) in bits.iter().enumerate() {
                let (i, j) = (k / n + 1, k % n + 1);
                if *b && i < j {
                    s.push_str(&format!("edge(n{i},n{j}). "));
                }
            }
            s
        })
    })
}

fn factors(t: Term) -> Vec<Term> {
    match t {
        Term::Product(ts) => ts,
        Term::Int(1) => Vec::new(),
        t => vec![t],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parse_print_round_trip(rules in prop::collection::vec(rule(), 0..5)) {
        let src = rules.join("\n");
        let p = parse_program(&src).unwrap();
        let printed = print_program(&p);
        prop_assert_eq!(parse_program(&printed).unwrap(), p);
        prop_assert_eq!(print_program(&parse_program(&printed).unwrap()), printed);
    }

    #[test]
    fn normalize_is_idempotent(src in safe_program()) {
        let s = parse_schema(SCHEMA).unwrap();
        let p = parse_program(&src).unwrap();
        let Ok((inferred, _)) = infer_schemas(&p, &s) else { return Ok(()) };
        let once = normalize(&p, &inferred);
        let twice = normalize(&once.program, &once.schema);
        prop_assert_eq!(twice.program, once.program);
    }

    #[test]
    fn body_translation_is_compositional(a in body(), b in body()) {
        let s = parse_schema(SCHEMA).unwrap();
        let sc = Scope::new(&s, BTreeSet::from(["p".to_string(), "q".to_string()]));
        let conj = |src: &str| -> Vec<Literal> { parse_program(&format!(":- {src}.")).unwrap().rules[0].body[0].clone() };
        let (la, lb) = (conj(&a), conj(&b));
        let joined: Vec<Literal> = la.iter().chain(&lb).cloned().collect();
        let mut want = factors(sc.conj(&la));
        want.extend(factors(sc.conj(&lb)));
        prop_assert_eq!(factors(sc.conj(&joined)), want);
        for l in &joined {
            prop_assert_eq!(factors(sc.conj(std::slice::from_ref(l))), factors(sc.literal(l)));
        }
    }

    #[test]
    fn optimization_keeps_cover_solutions(facts in graph_facts()) {
        let c = Case::inline("DOMAINS: node.\nPREDICATES: edge(node,node).\n", &common::read("min_vertex_cover.npdl"), &facts);
        prop_assert_eq!(c.solution_set(&[]), c.solution_set(&PIPELINE));
        let m = c.model(&[]);
        for pass in PIPELINE {
            let once = pass.apply(&m, &c.an.program);
            prop_assert_eq!(print_model(&pass.apply(&once, &c.an.program)), print_model(&once));
        }
    }

    #[test]
    fn optimization_keeps_coloring_solutions(facts in graph_facts(), k in 1usize..=3) {
        let colors: String = (1..=k).map(|i| format!("color(c{i}). ")).collect();
        let c = Case::inline("DOMAINS: node; color.\nPREDICATES: edge(node,node).\n", &common::read("k_coloring.npdl"), &format!("{facts}{colors}"));
        prop_assert_eq!(c.solution_set(&[]), c.solution_set(&PIPELINE));
    }

    #[test]
    fn solver_agrees_with_the_oracle_on_random_graphs(facts in graph_facts()) {
        let c = Case::inline("DOMAINS: node.\nPREDICATES: edge(node,node).\n", &common::read("min_vertex_cover.npdl"), &facts);
        prop_assert_eq!(c.goal_answers(&PIPELINE, Mode::AllOptimal), c.oracle());
        let (_, g) = c.ground(&PIPELINE);
        let sols = solver::solve(&g, Mode::All, Limits::default()).unwrap();
        for s in &sols {
            prop_assert!(g.check(&s.values));
        }
    }
}
