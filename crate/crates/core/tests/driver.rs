mod common;

use std::process::Command;

use common::{corpus, Case, SOLVABLE};
use npdl::driver::{self, gen_instance, Family, GenParams, Options};
use npdl::frontend::{GoalMode, Value};
use npdl::solver::{Limits, Mode};
use sha2::{Digest, Sha256};

#[test]
fn answers_agree_with_the_oracle() {
    for (s, p, d) in SOLVABLE {
        let c = Case::load(s, p, d);
        let oracle = c.oracle();
        let first = c.run(Mode::First);
        assert_eq!(first.is_no_solution(), oracle.is_empty(), "{p} on {d}");
        for a in &first.answers {
            match c.query.goal.mode {
                GoalMode::Plain => assert!(oracle.contains(a), "{p} on {d}"),
                _ => assert_eq!(Some(a.len()), oracle.iter().next().map(|o| o.len()), "{p} on {d}"),
            }
        }
        let all = c.run(Mode::All);
        let got: std::collections::BTreeSet<_> = all.answers.into_iter().collect();
        assert_eq!(got, oracle, "{p} on {d}");
    }
}

#[test]
fn min_coloring_answer_has_three_colors() {
    let o = Case::load("coloring", "min_coloring", "graph4_colors").run(Mode::First);
    assert_eq!(o.optimum, Some(3));
    assert_eq!(o.answers[0].len(), 3);
}

#[test]
fn closure_query_needs_no_solving() {
    let o = Case::load("graph", "transitive_closure", "chain4").run(Mode::First);
    assert_eq!(o.answers[0].len(), 6);
    assert_eq!(o.stats.solver_calls, 0);
}

#[test]
fn hamiltonian_cycle_on_a_four_cycle() {
    let o = Case::load("graph", "hamiltonian_cycle", "cycle4").run(Mode::First);
    let a = &o.answers[0];
    assert_eq!(a.len(), 4);
    // Successor map visiting all four nodes from n1.
    let next = |v: &Value| a.iter().find(|t| &t[0] == v).map(|t| t[1].clone());
    let start = Value::Sym("n1".into());
    let mut cur = start.clone();
    for _ in 0..4 {
        cur = next(&cur).expect("successor");
    }
    assert_eq!(cur, start);
}

#[test]
fn hamiltonian_cycle_on_a_path_has_no_solution() {
    let o = Case::load("graph", "hamiltonian_cycle", "path4").run(Mode::First);
    assert!(o.is_no_solution());
    assert!(o.stats.iterations > 1);
}

#[test]
fn one_solver_call_without_p3() {
    for (s, p, d) in SOLVABLE {
        let c = Case::load(s, p, d);
        if c.an.partition.p3_is_empty() {
            assert_eq!(c.run(Mode::First).stats.solver_calls, 1, "{p}");
            assert_eq!(c.run(Mode::All).stats.solver_calls, 1, "{p}");
        }
    }
}

#[test]
fn p4_skipped_when_goal_is_elsewhere() {
    let schema = "DOMAINS: node.\nPREDICATES: edge(node,node).\n";
    let facts = "node(a). node(b). edge(a,b).";
    let program = "v(X) <~ node(X).\n:- edge(X,Y), not v(X), not v(Y).\nw(X) :- v(X).\n? v(X).\n";
    let c = Case::inline(schema, program, facts);
    assert_eq!(c.an.partition.p4.len(), 1);
    let o = c.run(Mode::First);
    assert!(!o.stats.p4_evaluated);
    assert!(!o.is_no_solution());
}

#[test]
fn candidate_cap_limits_iterations() {
    let c = Case::load("graph", "hamiltonian_cycle", "path4");
    let opts = Options { candidate_cap: Some(2), ..Options::default() };
    let o = driver::run_analyzed(&c.an, &c.db, &opts).unwrap();
    assert_eq!(o.stats.iterations, 2);
}

#[test]
fn resource_limit_maps_to_exit_code_three() {
    let c = Case::load("latin", "latin_squares", "latin3");
    let opts = Options { mode: Mode::All, limits: Limits { node_limit: 2, time_limit: None }, ..Options::default() };
    let e = driver::run_analyzed(&c.an, &c.db, &opts).unwrap_err();
    assert_eq!(e.exit_code(), 3);
}

#[test]
fn optimization_goal_outside_p2_is_rejected() {
    let c = Case::inline(
        "DOMAINS: node.\nPREDICATES: edge(node,node).\n",
        "tc(X,Y) :- edge(X,Y).\n? min |tc(X,Y)|.\n",
        "node(a).",
    );
    let opts = Options::default();
    assert!(driver::run_analyzed(&c.an, &c.db, &opts).is_err());
}

#[test]
fn generated_families_have_expected_shapes() {
    let chain = gen_instance(Family::Chain, &GenParams::new(4)).unwrap();
    assert_eq!((chain.nodes.len(), chain.edges.len()), (4, 3));
    let complete = gen_instance(Family::Complete, &GenParams::new(3)).unwrap();
    assert_eq!(complete.edges.len(), 6);
    for (a, b) in &complete.edges {
        assert!(complete.edges.contains(&(b.clone(), a.clone())));
    }
    let cycle = gen_instance(Family::Cycle, &GenParams::new(4)).unwrap();
    assert_eq!(cycle.edges.len(), 4);
    let ladder = gen_instance(Family::GridLadder, &GenParams::new(3)).unwrap();
    assert_eq!((ladder.nodes.len(), ladder.edges.len()), (6, 2 * 7));
    let colored = gen_instance(Family::Chain, &GenParams { colors: 2, ..GenParams::new(2) }).unwrap();
    assert!(colored.facts().contains("color(c2)."));
}

#[test]
fn random_graphs_are_reproducible() {
    let params = GenParams { n: 6, p: 0.5, seed: Some(7), colors: 0 };
    let digest = |s: String| Sha256::digest(s.as_bytes()).to_vec();
    let a = digest(gen_instance(Family::RandomGnp, &params).unwrap().facts());
    let b = digest(gen_instance(Family::RandomGnp, &params).unwrap().facts());
    assert_eq!(a, b);
    let other = GenParams { seed: Some(8), ..params.clone() };
    assert_ne!(a, digest(gen_instance(Family::RandomGnp, &other).unwrap().facts()));
}

#[test]
fn generator_rejects_bad_parameters() {
    assert!(gen_instance(Family::Chain, &GenParams::new(0)).is_err());
    assert!(gen_instance(Family::RandomGnp, &GenParams::new(4)).is_err());
    let p = GenParams { p: 1.5, seed: Some(1), ..GenParams::new(4) };
    assert!(gen_instance(Family::RandomGnp, &p).is_err());
}

fn npdl(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_npdl")).args(args).output().expect("run npdl")
}

fn path(rel: &str) -> String {
    corpus(rel).to_string_lossy().into_owned()
}

#[test]
fn cli_exit_codes() {
    let vc = npdl(&["solve", &path("schemas/graph.schema"), &path("vertex_cover.npdl"), &path("data/graph4.facts")]);
    assert_eq!(vc.status.code(), Some(0));
    let none =
        npdl(&["solve", &path("schemas/graph.schema"), &path("hamiltonian_cycle.npdl"), &path("data/path4.facts")]);
    assert_eq!(none.status.code(), Some(1));
    assert_eq!(String::from_utf8_lossy(&none.stdout), "% no solution\n");
    let bad =
        npdl(&["solve", &path("schemas/graph.schema"), &path("st_vertex_cover.npdl"), &path("data/graph4.facts")]);
    assert_eq!(bad.status.code(), Some(2));
    let limit = npdl(&[
        "solve",
        &path("schemas/latin.schema"),
        &path("latin_squares.npdl"),
        &path("data/latin3.facts"),
        "--mode",
        "all",
        "--node-limit",
        "2",
    ]);
    assert_eq!(limit.status.code(), Some(3));
}

#[test]
fn cli_solve_output_is_byte_identical_across_runs() {
    let args = [
        "solve",
        &path("schemas/latin.schema"),
        &path("latin_squares.npdl"),
        &path("data/latin3.facts"),
        "--mode",
        "all",
    ];
    let a = npdl(&args);
    let b = npdl(&args);
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).contains("% answer 12\n"));
}

#[test]
fn cli_trace_and_emit() {
    let dir = std::env::temp_dir().join(format!("npdl-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("model.mod");
    let r = npdl(&[
        "solve",
        &path("schemas/coloring.schema"),
        &path("min_coloring.npdl"),
        &path("data/graph4_colors.facts"),
        "--trace",
        "--emit-opl",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&r.stderr).contains("solver calls"));
    assert!(std::fs::read_to_string(&out).unwrap().contains("range intcolor"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn cli_gen_and_eval() {
    let g = npdl(&["gen", "chain", "4"]);
    assert_eq!(String::from_utf8_lossy(&g.stdout).lines().filter(|l| l.starts_with("edge")).count(), 3);
    let e =
        npdl(&["eval", &path("schemas/graph.schema"), &path("transitive_closure.npdl"), &path("data/chain4.facts")]);
    assert_eq!(String::from_utf8_lossy(&e.stdout).lines().count(), 6);
    let c = npdl(&["check", &path("schemas/coloring.schema"), &path("min_coloring.npdl")]);
    assert!(String::from_utf8_lossy(&c.stdout).contains("P2_G:\n  (+)[C] col(X, C)"));
}
