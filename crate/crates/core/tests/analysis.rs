mod common;

use common::{read, Case};
use npdl::analysis::{
    analyze, check_safety, classify_predicates, infer_schemas, mark_constrained, normalize, partition_components,
    stratify, AnalysisError,
};
use npdl::frontend::{parse_program, parse_query, parse_schema, print_rule, Program, RuleKind, Schema};

fn graph_schema() -> Schema {
    parse_schema("DOMAINS: node; color.\nPREDICATES: edge(node,node).\n").unwrap()
}

fn printed(rules: &[npdl::frontend::Rule]) -> Vec<String> {
    rules.iter().map(print_rule).collect()
}

#[test]
fn coloring_partition() {
    let c = Case::load("coloring", "min_coloring", "graph4_colors");
    let part = &c.an.partition;
    assert_eq!(printed(&part.p2_g), ["(+)[C] col(X, C) :- node(X), color(C)."]);
    assert_eq!(printed(&part.p2_s), ["used_color(C) :- col(X, C)."]);
    assert_eq!(printed(&part.p2_c), [":- edge(X, Y), col(X, C), col(Y, C)."]);
    assert!(part.p1.is_empty() && part.p3_is_empty() && part.p4.is_empty());
}

#[test]
fn hamiltonian_partition() {
    let c = Case::load("graph", "hamiltonian_cycle", "cycle4");
    let part = &c.an.partition;
    assert_eq!(part.p3_s.len(), 1);
    assert!(part.p3_s.iter().all(|r| r.head[0].pred == "reached"));
    assert_eq!(printed(&part.p3_c), [":- node(X), node(Y), not reached(X, Y)."]);
    assert!(c.an.constrained.recursion_dependent.contains("reached"));
}

#[test]
fn closure_lands_in_p1() {
    let c = Case::load("graph", "transitive_closure", "chain4");
    assert_eq!(c.an.partition.p1.len(), c.an.partition.len());
}

#[test]
fn partition_covers_every_rule_once() {
    for (s, p, d) in common::SOLVABLE {
        let c = Case::load(s, p, d);
        assert_eq!(c.an.partition.len(), c.an.program.rules.len(), "{p}");
        let p3: Vec<&str> = c.an.partition.p3_s.iter().chain(&c.an.partition.p4).flat_map(|r| r.defined()).collect();
        for r in &c.an.partition.p2_c {
            assert!(r.body_literals().all(|l| l.atom().is_none_or(|a| !p3.contains(&a.pred.as_str()))));
        }
        let guess: Vec<&str> = c.an.partition.p2_g.iter().flat_map(|r| r.defined()).collect();
        assert_eq!(guess, c.an.classification.guess.iter().map(String::as_str).collect::<Vec<_>>(), "{p}");
    }
}

#[test]
fn cover_constraint_constrains_no_standard_predicate() {
    let p = parse_query(&read("vertex_cover.npdl")).unwrap().program;
    let c = mark_constrained(&p);
    assert!(c.constrained.is_empty());
}

#[test]
fn used_color_is_constrained_not_recursive() {
    let p = parse_query(&read("min_coloring.npdl")).unwrap().program;
    let c = mark_constrained(&p);
    assert!(c.constrained.contains("used_color"));
    assert!(c.recursion_dependent.is_empty());
}

#[test]
fn safety_diagnostics() {
    assert!(check_safety(&parse_query(&read("vertex_cover.npdl")).unwrap().program).is_empty());
    let neg = check_safety(&parse_program("p(X) :- not q(X).").unwrap());
    assert_eq!(neg.len(), 1);
    assert_eq!(neg[0].var.as_deref(), Some("X"));
    let cmp = check_safety(&parse_program("p(X,Y) :- e(X,Z), Y = Z+1.").unwrap());
    assert_eq!(cmp.iter().map(|d| d.var.clone().unwrap()).collect::<Vec<_>>(), ["Y"]);
}

#[test]
fn strata_order() {
    let p = parse_query(&read("primes.npdl")).unwrap().program;
    let strata = stratify(&p.rules).unwrap();
    assert_eq!(strata.len(), 2);
    assert_eq!(strata[0][0].head[0].pred, "composite");
    assert_eq!(strata[1][0].head[0].pred, "prime");
    let tc = parse_query(&read("transitive_closure.npdl")).unwrap().program;
    assert_eq!(stratify(&tc.rules).unwrap().len(), 1);
    let bad = stratify(&parse_program("p :- not p.").unwrap().rules);
    assert_eq!(bad, Err(AnalysisError::Unstratified(vec!["p".into()])));
}

#[test]
fn union_and_intersection_domains() {
    let s = graph_schema();
    let (u, _) = infer_schemas(&parse_program("p(X) :- node(X).\np(X) :- color(X).").unwrap(), &s).unwrap();
    let d = &u.signature("p").unwrap()[0];
    assert!(u.derived_domains.contains_key(d), "{d}");
    let (i, warnings) = infer_schemas(&parse_program("q(X) :- node(X), color(X).").unwrap(), &s).unwrap();
    let d = &i.signature("q").unwrap()[0];
    assert!(i.derived_domains.contains_key(d));
    assert_ne!(u.derived_domains[&u.signature("p").unwrap()[0]], i.derived_domains[d]);
    assert!(warnings.is_empty() || warnings.iter().all(|w| w.warning));
    let (c, _) = infer_schemas(&parse_query(&read("min_coloring.npdl")).unwrap().program, &s).unwrap();
    assert_eq!(c.signature("col").unwrap(), ["node", "color"]);
}

#[test]
fn alternative_rules_merge_into_one_extended_rule() {
    let s = parse_schema(&read("schemas/sat.schema")).unwrap();
    let p = parse_query(&read("max_sat.npdl")).unwrap().program;
    let (inferred, _) = infer_schemas(&p, &s).unwrap();
    let n = normalize(&p, &inferred).program;
    let f: Vec<_> = n.rules.iter().filter(|r| r.head.first().is_some_and(|h| h.pred == "f")).collect();
    assert_eq!(f.len(), 1);
    assert_eq!(f[0].body.len(), 2);
}

#[test]
fn normalize_is_idempotent_on_the_corpus() {
    for (s, p, _) in common::SOLVABLE {
        let schema = parse_schema(&read(&format!("schemas/{s}.schema"))).unwrap();
        let prog = parse_query(&read(&format!("{p}.npdl"))).unwrap().program;
        let (inferred, _) = infer_schemas(&prog, &schema).unwrap();
        let once = normalize(&prog, &inferred);
        let twice = normalize(&once.program, &once.schema);
        assert_eq!(twice.program, once.program, "{p}");
    }
}

#[test]
fn guess_rules_are_validated() {
    let two = parse_program("s(X) <~ node(X).\ns(X) <~ node(X).").unwrap();
    assert!(matches!(classify_predicates(&two), Err(AnalysisError::MultipleDefinition(_))));
    let dep = parse_program("(+)[C] col(X,C) :- node(X), color(C).\nused(C) :- col(X,C).\ns(C) <~ used(C).").unwrap();
    assert!(matches!(classify_predicates(&dep), Err(AnalysisError::GuessDependency { .. })));
    let ok = classify_predicates(&parse_query(&read("min_coloring.npdl")).unwrap().program).unwrap();
    assert_eq!(ok.guess, ["col"]);
    assert_eq!(ok.standard, ["used_color"]);
}

#[test]
fn analyze_rejects_unsafe_programs() {
    let p: Program = parse_program("p(X) :- not edge(X,X).").unwrap();
    assert!(matches!(analyze(&graph_schema(), &p), Err(AnalysisError::Diagnostics(_))));
}

#[test]
fn p2_constraints_never_see_p3() {
    let p = parse_query(&read("hamiltonian_cycle.npdl")).unwrap().program;
    let part = partition_components(&p).unwrap();
    assert!(part.p2_c.iter().all(|r| r.kind == RuleKind::Constraint));
    assert_eq!(part.p2_c.len(), 2);
}
