mod common;

use std::collections::BTreeSet;

use common::{read, Case, SOLVABLE};
use npdl::fixpoint;
use npdl::frontend::{parse_database, parse_program, parse_query, parse_schema, print_program, Database, RuleKind};
use npdl::oracle::{
    self, answers_from_models, enumerate_stable_models, guess_and_check, is_stable, st_transform, OracleError,
};

fn graph_db(facts: &str) -> Database {
    let s = parse_schema(&read("schemas/graph.schema")).unwrap();
    parse_database(&read(&format!("data/{facts}.facts")), &s).unwrap()
}

#[test]
fn self_negation_has_no_model() {
    let p = parse_program("p :- not p.").unwrap();
    let models = enumerate_stable_models(&p.rules, &Database::default(), oracle::DEFAULT_BOUND).unwrap();
    assert!(models.is_empty());
}

#[test]
fn vertex_cover_on_isolated_node_has_two_models() {
    let p = parse_query(&read("st_vertex_cover.npdl")).unwrap().program;
    let models = enumerate_stable_models(&p.rules, &graph_db("single_node"), oracle::DEFAULT_BOUND).unwrap();
    assert_eq!(models.len(), 2);
    let vs: BTreeSet<usize> = models.iter().map(|m| m.get("v").map_or(0, |t| t.len())).collect();
    assert_eq!(vs, BTreeSet::from([0, 1]));
}

#[test]
fn partition_form_rewrites_to_the_negation_form() {
    let p = parse_query(&read("vertex_cover_partition.npdl")).unwrap().program;
    let st = st_transform(&p);
    let want = parse_query(&read("st_vertex_cover.npdl")).unwrap().program;
    assert_eq!(print_program(&st).replace("c__st1", "c"), print_program(&want));
}

#[test]
fn binary_partition_without_constraints_gives_two_rules() {
    let p = parse_program("a(X) (+) b(X) :- node(X).").unwrap();
    let st = st_transform(&p);
    assert_eq!(st.rules.len(), 2);
    assert!(st.rules.iter().all(|r| r.kind == RuleKind::Standard));
}

#[test]
fn every_cover_is_a_model_and_back() {
    let db = graph_db("graph4");
    let p = parse_query(&read("st_vertex_cover.npdl")).unwrap().program;
    let models = enumerate_stable_models(&p.rules, &db, oracle::DEFAULT_BOUND).unwrap();
    let nodes = ["a", "b", "c", "d"];
    let edges = &db.facts["edge"];
    // Brute force over the 16 subsets of nodes.
    let mut covers = BTreeSet::new();
    for mask in 0u32..16 {
        let has = |v: &npdl::frontend::Value| {
            nodes.iter().position(|n| v.to_string() == *n).is_some_and(|i| mask >> i & 1 == 1)
        };
        if edges.iter().all(|e| has(&e[0]) || has(&e[1])) {
            covers.insert((0..4).filter(|i| mask >> i & 1 == 1).map(|i| nodes[i].to_string()).collect::<BTreeSet<_>>());
        }
    }
    let got: BTreeSet<BTreeSet<String>> = models
        .iter()
        .map(|m| m.get("v").map(|ts| ts.iter().map(|t| t[0].to_string()).collect()).unwrap_or_default())
        .collect();
    assert_eq!(got, covers);
    for m in &models {
        assert!(is_stable(&p.rules, &db, m));
    }
}

#[test]
fn stratified_programs_have_the_fixpoint_as_only_model() {
    let cases = [
        ("graph", "transitive_closure", "chain4"),
        ("graph", "transitive_closure", "cycle4"),
        ("prime", "primes", "empty"),
    ];
    for (s, p, d) in cases {
        let c = Case::load(s, p, d);
        let db = c.full_db();
        let models = enumerate_stable_models(&c.an.program.rules, &db, oracle::DEFAULT_BOUND).unwrap();
        assert_eq!(models.len(), 1, "{p}");
        let fix = fixpoint::evaluate_stratified(&c.an.program.rules, &fixpoint::from_database(&db)).unwrap();
        let strip = |m: &fixpoint::Interpretation| -> fixpoint::Interpretation {
            m.iter().filter(|(_, t)| !t.is_empty()).map(|(p, t)| (p.clone(), t.clone())).collect()
        };
        assert_eq!(strip(&oracle::strip_auxiliary(&models[0])), strip(&fix), "{p}");
    }
}

#[test]
fn rewrite_and_direct_enumeration_agree() {
    for (s, p, d) in SOLVABLE {
        let c = Case::load(s, p, d);
        let db = c.full_db();
        let direct = guess_and_check(&c.an.program.rules, &db).unwrap();
        let via_st = c.oracle();
        assert_eq!(answers_from_models(&direct, &c.query.goal), via_st, "{p} on {d}");
    }
}

#[test]
fn minimum_cover_answers_are_the_two_pairs() {
    // Exhaustive: no single node covers all four edges, and exactly {a,c}
    // and {b,c} among the six pairs do.
    let c = Case::load("graph", "min_vertex_cover", "graph4");
    let got: BTreeSet<Vec<String>> = c.oracle().iter().map(|a| a.iter().map(|t| t[0].to_string()).collect()).collect();
    let want = BTreeSet::from([vec!["a".to_string(), "c".to_string()], vec!["b".to_string(), "c".to_string()]]);
    assert_eq!(got, want);
}

#[test]
fn four_queens_has_two_answers() {
    let c = Case::load("queens", "queens", "queens4");
    assert_eq!(c.oracle().len(), 2);
}

#[test]
fn query_without_models_has_empty_answer_set() {
    let c = Case::load("graph", "hamiltonian_cycle", "path4");
    assert!(c.oracle().is_empty());
}

#[test]
fn oracle_refuses_large_instances() {
    let c = Case::load("latin", "latin_squares", "latin3");
    let st = st_transform(&c.an.program);
    let r = enumerate_stable_models(&st.rules, &c.full_db(), 4);
    assert!(matches!(r, Err(OracleError::BoundExceeded(_, 4))));
}
