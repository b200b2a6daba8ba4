//! Acceptance criteria, one line per criterion. Exits non-zero if any fails.

mod common;

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{corpus, tokens, Case, SOLVABLE};
use npdl::driver::{gen_instance, Family, GenParams};
use npdl::fixpoint::{self, Interpretation};
use npdl::frontend::{parse_program, parse_query, print_rule, Database, GoalMode};
use npdl::optimizer::{parse_opt, PIPELINE};
use npdl::oracle::{self, enumerate_stable_models};
use npdl::solver::{self, Limits, Mode};
use npdl::transpile::print_model;

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn within(start: Instant, limit: Duration) -> Check {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.2?}, limit {limit:?}"))
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

fn golden_opl() -> Check {
    let start = Instant::now();
    let c = Case::load("coloring", "min_coloring", "graph4_colors");
    let plain = print_model(&c.model(&parse_opt("none").unwrap()));
    ensure(tokens(&plain) == tokens(&golden("coloring_plain.mod")), || format!("unoptimized model differs:\n{plain}"))?;
    let opt = print_model(&c.model(&PIPELINE));
    ensure(tokens(&opt) == tokens(&golden("coloring_full.mod")), || format!("optimized model differs:\n{opt}"))?;
    within(start, Duration::from_secs(1))
}

fn numbers(n: usize) -> String {
    (1..=n).map(|i| format!("num({i}). ")).collect()
}

fn graph_databases() -> Vec<String> {
    let mut out = vec![common::read("data/graph4.facts")];
    for (f, n) in [(Family::Chain, 4), (Family::Cycle, 5), (Family::Complete, 4), (Family::GridLadder, 2)] {
        out.push(gen_instance(f, &GenParams::new(n)).unwrap().facts());
    }
    for seed in [1, 2, 3] {
        out.push(
            gen_instance(Family::RandomGnp, &GenParams { n: 5, p: 0.4, seed: Some(seed), colors: 0 }).unwrap().facts(),
        );
    }
    out
}

fn agreement(c: &Case, label: &str) -> Check {
    let oracle = c.oracle();
    let ours = c.run(Mode::All);
    let got: BTreeSet<_> = ours.answers.iter().cloned().collect();
    match c.query.goal.mode {
        GoalMode::Plain => {
            ensure(got == oracle, || format!("{label}: {} answers vs oracle {}", got.len(), oracle.len()))
        }
        _ => {
            let want = oracle.iter().next().map(|a| a.len());
            ensure(ours.optimum == want, || format!("{label}: optimum {:?} vs oracle {want:?}", ours.optimum))
        }
    }
}

fn transpilation_correctness() -> Check {
    let start = Instant::now();
    let graph = "DOMAINS: node.\nPREDICATES: edge(node,node).\n";
    let coloring = "DOMAINS: node; color.\nPREDICATES: edge(node,node).\n";
    for facts in graph_databases() {
        for p in ["vertex_cover", "min_vertex_cover", "min_dominating_set", "min_edge_dominating_set"] {
            agreement(&Case::inline(graph, &common::read(&format!("{p}.npdl")), &facts), p)?;
        }
        if facts.matches("node(").count() <= 5 {
            for k in [2, 3] {
                let db = format!("{facts}{}", (1..=k).map(|i| format!("color(c{i}). ")).collect::<String>());
                for p in ["k_coloring", "min_coloring"] {
                    agreement(&Case::inline(coloring, &common::read(&format!("{p}.npdl")), &db), p)?;
                }
            }
        }
    }
    agreement(&Case::load("sat", "max_sat", "sat"), "max_sat")?;
    let queens = "INT-DOMAINS: num.\n";
    for n in 1..=4 {
        agreement(&Case::inline(queens, &common::read("queens.npdl"), &numbers(n)), &format!("queens {n}"))?;
    }
    let latin = common::read("schemas/latin.schema");
    for n in 1..=3 {
        agreement(&Case::inline(&latin, &common::read("latin_squares.npdl"), &numbers(n)), &format!("latin {n}"))?;
    }
    agreement(&Case::load("latin", "latin_squares", "latin3_pre"), "latin preassigned")?;
    within(start, Duration::from_secs(60))
}

fn fixed_values() -> Check {
    let start = Instant::now();
    let cover = Case::load("graph", "min_vertex_cover", "graph4").run(Mode::First);
    ensure(cover.optimum == Some(2), || format!("min vertex cover {:?}", cover.optimum))?;
    let colors = Case::load("coloring", "min_coloring", "graph4_colors").run(Mode::First);
    ensure(colors.optimum == Some(3), || format!("min coloring {:?}", colors.optimum))?;
    let count = |s, p, d| {
        let (_, g) = Case::load(s, p, d).ground(&PIPELINE);
        solver::solve(&g, Mode::All, Limits::default()).map(|v| v.len()).unwrap_or(0)
    };
    let q = count("queens", "queens", "queens4");
    ensure(q == 2, || format!("4-queens {q}"))?;
    let l = count("latin", "latin_squares", "latin3");
    ensure(l == 12, || format!("latin 3x3 {l}"))?;
    let tc = Case::load("graph", "transitive_closure", "chain4").run(Mode::First);
    ensure(tc.answers.first().map(|a| a.len()) == Some(6), || "transitive closure".into())?;
    within(start, Duration::from_secs(10))
}

fn decoded(c: &Case, m: &npdl::transpile::ConstraintModel) -> BTreeSet<Interpretation> {
    let g = solver::ground(m, &c.full_db(), &c.m1()).unwrap();
    solver::solve(&g, Mode::All, Limits::default()).unwrap().iter().map(|s| solver::decode(&g, s)).collect()
}

fn pass_preservation() -> Check {
    let start = Instant::now();
    for (s, p, d) in SOLVABLE {
        let c = Case::load(s, p, d);
        let raw = c.model(&[]);
        let want = decoded(&c, &raw);
        for pass in PIPELINE {
            let once = pass.apply(&raw, &c.an.program);
            ensure(decoded(&c, &once) == want, || format!("{p}: {pass} changes solutions"))?;
            let twice = pass.apply(&once, &c.an.program);
            ensure(print_model(&twice) == print_model(&once), || format!("{p}: {pass} not idempotent"))?;
        }
        let mut m = raw;
        for pass in PIPELINE {
            m = pass.apply(&m, &c.an.program);
            ensure(decoded(&c, &m) == want, || format!("{p}: pipeline step {pass} changes solutions"))?;
        }
    }
    within(start, Duration::from_secs(60))
}

fn partition_conformance() -> Check {
    let c = Case::load("coloring", "min_coloring", "graph4_colors");
    let part = &c.an.partition;
    let show = |rs: &[npdl::frontend::Rule]| rs.iter().map(print_rule).collect::<Vec<_>>();
    ensure(show(&part.p2_g) == ["(+)[C] col(X, C) :- node(X), color(C)."], || format!("P2_G {:?}", show(&part.p2_g)))?;
    ensure(show(&part.p2_s) == ["used_color(C) :- col(X, C)."], || format!("P2_S {:?}", show(&part.p2_s)))?;
    ensure(show(&part.p2_c) == [":- edge(X, Y), col(X, C), col(Y, C)."], || format!("P2_C {:?}", show(&part.p2_c)))?;
    ensure(part.p1.is_empty() && part.p3_is_empty() && part.p4.is_empty(), || "P1/P3/P4 not empty".into())?;

    let h = Case::load("graph", "hamiltonian_cycle", "cycle4");
    let hp = &h.an.partition;
    ensure(!hp.p3_s.is_empty() && hp.p3_s.iter().all(|r| r.head[0].pred == "reached"), || {
        "reached rules not in P3_S".into()
    })?;
    ensure(show(&hp.p3_c) == [":- node(X), node(Y), not reached(X, Y)."], || format!("P3_C {:?}", show(&hp.p3_c)))?;

    for (s, p, d) in SOLVABLE {
        let c = Case::load(s, p, d);
        if c.an.partition.p3_is_empty() {
            for mode in [Mode::First, Mode::All] {
                let n = c.run(mode).stats.solver_calls;
                ensure(n == 1, || format!("{p}: {n} solver calls"))?;
            }
        }
    }
    Ok(())
}

fn oracle_consistency() -> Check {
    let start = Instant::now();
    let none = enumerate_stable_models(
        &parse_program("p :- not p.").unwrap().rules,
        &Database::default(),
        oracle::DEFAULT_BOUND,
    )
    .map_err(|e| e.to_string())?;
    ensure(none.is_empty(), || format!("{} models for p :- not p", none.len()))?;

    let single = Case::load("graph", "vertex_cover", "single_node");
    let st = parse_query(&common::read("st_vertex_cover.npdl")).unwrap().program;
    let two =
        enumerate_stable_models(&st.rules, &single.full_db(), oracle::DEFAULT_BOUND).map_err(|e| e.to_string())?;
    ensure(two.len() == 2, || format!("{} models on one node", two.len()))?;

    let nonempty = |m: &Interpretation| -> Interpretation {
        m.iter().filter(|(_, t)| !t.is_empty()).map(|(p, t)| (p.clone(), t.clone())).collect()
    };
    for (s, p, d) in [
        ("graph", "transitive_closure", "chain4"),
        ("graph", "transitive_closure", "cycle4"),
        ("prime", "primes", "empty"),
    ] {
        let c = Case::load(s, p, d);
        let db = c.full_db();
        let models =
            enumerate_stable_models(&c.an.program.rules, &db, oracle::DEFAULT_BOUND).map_err(|e| e.to_string())?;
        ensure(models.len() == 1, || format!("{p} on {d}: {} models", models.len()))?;
        let fix = fixpoint::evaluate_stratified(&c.an.program.rules, &fixpoint::from_database(&db)).unwrap();
        ensure(nonempty(&oracle::strip_auxiliary(&models[0])) == nonempty(&fix), || {
            format!("{p} on {d}: model differs")
        })?;
    }
    within(start, Duration::from_secs(5))
}

fn npdl(args: &[String]) -> Vec<u8> {
    Command::new(env!("CARGO_BIN_EXE_npdl")).args(args).output().expect("run npdl").stdout
}

fn determinism() -> Check {
    let path = |r: &str| corpus(r).to_string_lossy().into_owned();
    let runs = [
        ("schemas/latin.schema", "latin_squares.npdl", "data/latin3.facts"),
        ("schemas/queens.schema", "queens.npdl", "data/queens4.facts"),
        ("schemas/coloring.schema", "k_coloring.npdl", "data/graph4_colors.facts"),
        ("schemas/graph.schema", "min_vertex_cover.npdl", "data/graph4.facts"),
        ("schemas/graph.schema", "hamiltonian_cycle.npdl", "data/cycle4.facts"),
    ];
    for (s, p, d) in runs {
        for mode in ["first", "all"] {
            let args: Vec<String> = vec!["solve".into(), path(s), path(p), path(d), "--mode".into(), mode.into()];
            let (a, b) = (npdl(&args), npdl(&args));
            ensure(!a.is_empty() && a == b, || format!("{p} --mode {mode} differs between runs"))?;
        }
    }
    let gen: Vec<String> =
        ["gen", "random-gnp", "6", "--p", "0.5", "--seed", "7", "--colors", "3"].map(String::from).to_vec();
    let (a, b) = (npdl(&gen), npdl(&gen));
    ensure(!a.is_empty() && a == b, || "gen random-gnp differs between runs".into())?;

    // A generated database solved twice through the binary.
    let dir = std::env::temp_dir().join(format!("npdl-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let facts = dir.join("gnp.facts");
    std::fs::write(&facts, &a).map_err(|e| e.to_string())?;
    let args: Vec<String> = vec![
        "solve".into(),
        path("schemas/coloring.schema"),
        path("k_coloring.npdl"),
        facts.to_string_lossy().into(),
        "--mode".into(),
        "all".into(),
    ];
    let same = npdl(&args) == npdl(&args);
    let _ = std::fs::remove_dir_all(&dir);
    ensure(same, || "solve over generated database differs between runs".into())
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("golden OPL text for the coloring model, plain and optimized", golden_opl),
        ("solver answer sets equal oracle answer sets across the corpus", transpilation_correctness),
        ("fixed values: cover 2, colors 3, queens 2, latin 12, closure 6", fixed_values),
        ("every pass and the pipeline keep solution sets; passes idempotent", pass_preservation),
        ("component partition of the coloring and hamiltonian programs; single solver call", partition_conformance),
        ("oracle: no model, two models, stratified programs equal fixpoint", oracle_consistency),
        ("byte-identical solve and gen output across runs", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        match check() {
            Ok(()) => println!("PASS criterion {}: {name} ({:.2?})", i + 1, start.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
