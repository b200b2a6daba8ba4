mod common;

use std::collections::BTreeSet;

use common::Case;
use npdl::fixpoint::{derive_once, evaluate_stratified, from_database, Interpretation};
use npdl::frontend::{parse_program, Value};

fn sym_pairs(ps: &[(&str, &str)]) -> BTreeSet<Vec<Value>> {
    ps.iter().map(|(a, b)| vec![Value::Sym(a.to_string()), Value::Sym(b.to_string())]).collect()
}

fn letters_chain() -> Case {
    Case::inline(
        "DOMAINS: node.\nPREDICATES: edge(node,node).\n",
        "tc(X,Y) :- edge(X,Y).\ntc(X,Y) :- edge(X,Z), tc(Z,Y).\n? tc(X,Y).\n",
        "node(a). node(b). node(c). node(d).\nedge(a,b). edge(b,c). edge(c,d).\n",
    )
}

#[test]
fn chain_closure_has_six_pairs() {
    let c = letters_chain();
    let m = evaluate_stratified(&c.an.program.rules, &from_database(&c.full_db())).unwrap();
    assert_eq!(m["tc"], sym_pairs(&[("a", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"), ("c", "d")]));
}

#[test]
fn no_rules_returns_base() {
    let c = letters_chain();
    let base = from_database(&c.full_db());
    assert_eq!(evaluate_stratified(&[], &base).unwrap(), base);
}

#[test]
fn naive_steps_of_the_closure() {
    let raw = parse_program("tc(X,Y) :- edge(X,Y).\ntc(X,Y) :- edge(X,Z), tc(Z,Y).\n").unwrap();
    let c = Case::load("graph", "transitive_closure", "graph4");
    let mut m: Interpretation = from_database(&c.full_db());
    let exit = derive_once(&raw.rules[0], &m);
    assert_eq!(exit.len(), 4);
    m.insert("tc".into(), exit);
    let step = derive_once(&raw.rules[1], &m);
    let new: BTreeSet<_> = step.difference(&m["tc"]).cloned().collect();
    assert_eq!(new, sym_pairs(&[("a", "d"), ("b", "d")]));
}

#[test]
fn chain_steps_add_pairs_by_path_length() {
    let c = letters_chain();
    let raw = parse_program("tc(X,Y) :- edge(X,Y).\ntc(X,Y) :- edge(X,Z), tc(Z,Y).\n").unwrap();
    let mut m = from_database(&c.full_db());
    m.insert("tc".into(), derive_once(&raw.rules[0], &m));
    let two: BTreeSet<_> = derive_once(&raw.rules[1], &m).difference(&m["tc"]).cloned().collect();
    assert_eq!(two, sym_pairs(&[("a", "c"), ("b", "d")]));
    m.get_mut("tc").unwrap().extend(two);
    let three: BTreeSet<_> = derive_once(&raw.rules[1], &m).difference(&m["tc"]).cloned().collect();
    assert_eq!(three, sym_pairs(&[("a", "d")]));
}

#[test]
fn unsatisfiable_comparison_derives_nothing() {
    let c = letters_chain();
    let r = parse_program("p(X) :- node(X), X < X.").unwrap();
    assert!(derive_once(&r.rules[0], &from_database(&c.full_db())).is_empty());
}

#[test]
fn literal_prime_program_matches_double_loop() {
    let c = Case::inline(
        "MinInt = 0.\nMaxInt = 10.\n",
        "composite(X) :- integer(X), integer(Y), integer(Z), X = Y * Z.\nprime(X) :- integer(X), not composite(X).\n? prime(X).\n",
        "",
    );
    let m = evaluate_stratified(&c.an.program.rules, &from_database(&c.full_db())).unwrap();
    let want: BTreeSet<Vec<Value>> =
        (0..=10).filter(|&x| !(0..=10).any(|y| (0..=10).any(|z| y * z == x))).map(|x| vec![Value::Int(x)]).collect();
    assert_eq!(m.get("prime").cloned().unwrap_or_default(), want);
}

#[test]
fn guarded_prime_program_finds_the_primes() {
    let c = Case::load("prime", "primes", "empty");
    let m = evaluate_stratified(&c.an.program.rules, &from_database(&c.full_db())).unwrap();
    let want: BTreeSet<Vec<Value>> =
        (2..=20i64).filter(|&x| (2..x).all(|d| x % d != 0)).map(|x| vec![Value::Int(x)]).collect();
    assert_eq!(m["prime"], want);
}

#[test]
fn result_is_a_fixpoint() {
    let c = Case::load("graph", "transitive_closure", "cycle4");
    let m = evaluate_stratified(&c.an.program.rules, &from_database(&c.full_db())).unwrap();
    for r in &c.an.program.rules {
        assert!(derive_once(r, &m).is_subset(&m[&r.head[0].pred]));
    }
    assert_eq!(m["tc"].len(), 16);
}
