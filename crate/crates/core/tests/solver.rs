mod common;

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use common::{Case, SOLVABLE};
use npdl::fixpoint::Interpretation;
use npdl::optimizer::PIPELINE;
use npdl::oracle;
use npdl::solver::{self, GroundModel, Limits, Mode, SolveError};
use npdl::transpile::Sense;

fn restrict(m: &Interpretation, preds: &BTreeSet<String>) -> Interpretation {
    m.iter().filter(|(p, ts)| preds.contains(*p) && !ts.is_empty()).map(|(p, t)| (p.clone(), t.clone())).collect()
}

/// Every total assignment of the cells, in odometer order.
fn brute_force(g: &GroundModel) -> Vec<Vec<i64>> {
    let mut vals: Vec<i64> = g.cells.iter().map(|c| c.lo).collect();
    let mut out = Vec::new();
    loop {
        if g.check(&vals) {
            out.push(vals.clone());
        }
        let mut i = 0;
        loop {
            if i == vals.len() {
                return out;
            }
            vals[i] += 1;
            if vals[i] <= g.cells[i].hi {
                break;
            }
            vals[i] = g.cells[i].lo;
            i += 1;
        }
    }
}

fn space(g: &GroundModel) -> f64 {
    g.cells.iter().map(|c| (c.hi - c.lo + 1) as f64).product()
}

#[test]
fn all_mode_matches_brute_force_on_small_models() {
    for (s, p, d) in SOLVABLE {
        let c = Case::load(s, p, d);
        for passes in [&[][..], &PIPELINE[..]] {
            let (_, g) = c.ground(passes);
            if space(&g) > 2e6 {
                continue;
            }
            let solved: BTreeSet<Vec<i64>> =
                solver::solve(&g, Mode::All, Limits::default()).unwrap().into_iter().map(|s| s.values).collect();
            let brute: BTreeSet<Vec<i64>> = brute_force(&g).into_iter().collect();
            assert_eq!(solved, brute, "{p} on {d}");
        }
    }
}

#[test]
fn optimum_matches_brute_force() {
    for (s, p, d) in SOLVABLE {
        let c = Case::load(s, p, d);
        let (_, g) = c.ground(&PIPELINE);
        let Some((sense, _)) = &g.objective else { continue };
        if space(&g) > 2e6 {
            continue;
        }
        let values = brute_force(&g).into_iter().filter_map(|v| g.objective_value(&v));
        let want = match sense {
            Sense::Minimize => values.min(),
            Sense::Maximize => values.max(),
        };
        let got = solver::solve(&g, Mode::Optimize, Limits::default()).unwrap();
        assert_eq!(got.first().and_then(|s| s.objective), want, "{p} on {d}");
    }
}

#[test]
fn decoded_solutions_are_the_guess_and_check_models() {
    for (s, p, d) in SOLVABLE {
        let c = Case::load(s, p, d);
        if !c.an.partition.p3_is_empty() {
            continue;
        }
        let (_, g) = c.ground(&PIPELINE);
        let preds: BTreeSet<String> = g.arrays.keys().cloned().collect();
        let decoded: BTreeSet<Interpretation> = solver::solve(&g, Mode::All, Limits::default())
            .unwrap()
            .iter()
            .map(|s| restrict(&solver::decode(&g, s), &preds))
            .collect();
        let direct: BTreeSet<Interpretation> = oracle::guess_and_check(&c.an.program.rules, &c.full_db())
            .unwrap()
            .iter()
            .map(|m| restrict(m, &preds))
            .collect();
        assert_eq!(decoded, direct, "{p} on {d}");
    }
}

#[test]
fn every_solution_satisfies_every_ground_constraint() {
    for (s, p, d) in SOLVABLE {
        let c = Case::load(s, p, d);
        let (_, g) = c.ground(&PIPELINE);
        for sol in solver::solve(&g, Mode::All, Limits::default()).unwrap() {
            for k in &g.constraints {
                assert!(k.holds(&sol.values), "{p} on {d}");
            }
        }
    }
}

#[test]
fn triangle_three_coloring_has_six_solutions() {
    // 3! bijections of three colors onto a triangle, as a brute-force count
    // over the 27 node colorings confirms.
    let brute = (0..27).filter(|k| {
        let (a, b, c) = (k % 3, k / 3 % 3, k / 9);
        a != b && b != c && a != c
    });
    assert_eq!(brute.count(), 6);
    let c = Case::load("coloring", "k_coloring", "triangle_colors");
    let (_, g) = c.ground(&PIPELINE);
    assert_eq!(solver::solve(&g, Mode::All, Limits::default()).unwrap().len(), 6);
}

#[test]
fn min_coloring_objective_is_three() {
    let c = Case::load("coloring", "min_coloring", "graph4_colors");
    let (_, g) = c.ground(&PIPELINE);
    let best = solver::solve(&g, Mode::Optimize, Limits::default()).unwrap();
    assert_eq!(best[0].objective, Some(3));
    let decoded = solver::decode(&g, &best[0]);
    assert_eq!(solver::extract_answer(&decoded, &c.query.goal.atom).len(), 3);
}

#[test]
fn first_vertex_cover_touches_every_edge() {
    let c = Case::load("graph", "vertex_cover", "graph4");
    let (_, g) = c.ground(&PIPELINE);
    let first = solver::solve(&g, Mode::First, Limits::default()).unwrap();
    let v = solver::extract_answer(&solver::decode(&g, &first[0]), &c.query.goal.atom);
    for e in &c.db.facts["edge"] {
        assert!(v.contains(&vec![e[0].clone()]) || v.contains(&vec![e[1].clone()]));
    }
}

#[test]
fn all_optimal_returns_every_minimum_cover() {
    let c = Case::load("graph", "min_vertex_cover", "graph4");
    let answers = c.goal_answers(&PIPELINE, Mode::AllOptimal);
    assert_eq!(answers, c.oracle());
}

#[test]
fn search_order_is_deterministic() {
    let c = Case::load("latin", "latin_squares", "latin3");
    let (_, g) = c.ground(&PIPELINE);
    let a = solver::solve(&g, Mode::All, Limits::default()).unwrap();
    let b = solver::solve(&g, Mode::All, Limits::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn node_limit_is_reported() {
    let c = Case::load("latin", "latin_squares", "latin3");
    let (_, g) = c.ground(&[]);
    let tiny = Limits { node_limit: 3, time_limit: None };
    assert!(matches!(solver::solve(&g, Mode::All, tiny), Err(SolveError::ResourceLimit(_))));
}

#[test]
fn enumeration_stops_on_break() {
    let c = Case::load("queens", "queens", "queens4");
    let (_, g) = c.ground(&PIPELINE);
    let mut seen = 0;
    solver::solve_each(&g, Limits::default(), &mut |_| {
        seen += 1;
        ControlFlow::Break(())
    })
    .unwrap();
    assert_eq!(seen, 1);
}

#[test]
fn all_false_goal_array_decodes_to_empty_relation() {
    let c = Case::load("graph", "vertex_cover", "empty");
    let (_, g) = c.ground(&PIPELINE);
    let sols = solver::solve(&g, Mode::All, Limits::default()).unwrap();
    assert_eq!(sols.len(), 1);
    assert!(solver::extract_answer(&solver::decode(&g, &sols[0]), &c.query.goal.atom).is_empty());
}
