#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use npdl::analysis::{self, Analyzed};
use npdl::driver;
use npdl::fixpoint::{self, Interpretation};
use npdl::frontend::{self, Database, Query, Schema};
use npdl::optimizer::Pass;
use npdl::oracle::{self, Answer};
use npdl::solver::{self, GroundModel, Limits, Mode};
use npdl::transpile::ConstraintModel;

pub fn corpus(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(rel)
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(corpus(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

/// Schema, query and facts of one corpus case.
pub struct Case {
    pub schema: Schema,
    pub query: Query,
    pub db: Database,
    pub an: Analyzed,
}

impl Case {
    pub fn load(schema: &str, program: &str, facts: &str) -> Case {
        let schema = frontend::parse_schema(&read(&format!("schemas/{schema}.schema"))).expect("schema");
        let query = frontend::parse_query(&read(&format!("{program}.npdl"))).expect("program");
        let db = frontend::parse_database(&read(&format!("data/{facts}.facts")), &schema).expect("facts");
        Case::build(schema, query, db)
    }

    pub fn inline(schema: &str, program: &str, facts: &str) -> Case {
        let schema = frontend::parse_schema(schema).expect("schema");
        let query = frontend::parse_query(program).expect("program");
        let db = frontend::parse_database(facts, &schema).expect("facts");
        Case::build(schema, query, db)
    }

    fn build(schema: Schema, query: Query, db: Database) -> Case {
        let an = analysis::analyze(&schema, &query.program).expect("analysis");
        Case { schema, query, db, an }
    }

    pub fn full_db(&self) -> Database {
        driver::prepare_database(&self.an, &self.db)
    }

    pub fn m1(&self) -> Interpretation {
        fixpoint::evaluate_stratified(&self.an.partition.p1, &fixpoint::from_database(&self.full_db())).expect("p1")
    }

    pub fn model(&self, passes: &[Pass]) -> ConstraintModel {
        driver::build_model(&self.an, passes).expect("model")
    }

    pub fn ground(&self, passes: &[Pass]) -> (ConstraintModel, GroundModel) {
        let m = self.model(passes);
        let g = solver::ground(&m, &self.full_db(), &self.m1()).expect("ground");
        (m, g)
    }

    /// Decoded solutions projected to the goal, as a set.
    pub fn solution_set(&self, passes: &[Pass]) -> BTreeSet<Interpretation> {
        let (_, g) = self.ground(passes);
        let sols = solver::solve(&g, Mode::All, Limits::default()).expect("solve");
        sols.iter().map(|s| solver::decode(&g, s)).collect()
    }

    pub fn goal_answers(&self, passes: &[Pass], mode: Mode) -> BTreeSet<Answer> {
        let (_, g) = self.ground(passes);
        let sols = solver::solve(&g, mode, Limits::default()).expect("solve");
        sols.iter().map(|s| solver::extract_answer(&solver::decode(&g, s), &self.query.goal.atom)).collect()
    }

    pub fn oracle(&self) -> BTreeSet<Answer> {
        oracle::oracle_answer(&self.an.program, &self.full_db(), oracle::DEFAULT_BOUND).expect("oracle")
    }

    pub fn run(&self, mode: Mode) -> driver::Outcome {
        let opts = driver::Options { mode, ..driver::Options::default() };
        driver::run_analyzed(&self.an, &self.db, &opts).expect("run")
    }
}

/// Whitespace-insensitive tokens; multi-character operators stay whole.
pub fn tokens(text: &str) -> Vec<String> {
    const OPS: [&str; 7] = ["<=>", "=>", "==", "!=", "<=", ">=", ".."];
    let mut out = Vec::new();
    let cs: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_alphanumeric() || c == '_' {
            let j = (i..cs.len()).find(|&j| !(cs[j].is_alphanumeric() || cs[j] == '_')).unwrap_or(cs.len());
            out.push(cs[i..j].iter().collect());
            i = j;
        } else {
            let rest: String = cs[i..cs.len().min(i + 3)].iter().collect();
            let op = OPS.iter().find(|o| rest.starts_with(**o)).map_or(1, |o| o.len());
            out.push(cs[i..i + op].iter().collect());
            i += op;
        }
    }
    out
}

/// Every (schema, program, facts) triple the solver handles.
pub const SOLVABLE: [(&str, &str, &str); 13] = [
    ("graph", "vertex_cover", "graph4"),
    ("graph", "vertex_cover_partition", "graph4"),
    ("graph", "min_vertex_cover", "graph4"),
    ("coloring", "k_coloring", "graph4_colors"),
    ("coloring", "k_coloring", "triangle_colors"),
    ("coloring", "min_coloring", "graph4_colors"),
    ("graph", "min_dominating_set", "graph4"),
    ("graph", "min_edge_dominating_set", "graph4"),
    ("sat", "max_sat", "sat"),
    ("queens", "queens", "queens4"),
    ("latin", "latin_squares", "latin3"),
    ("latin", "latin_squares", "latin3_pre"),
    ("graph", "hamiltonian_cycle", "cycle4"),
];
