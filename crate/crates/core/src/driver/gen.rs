use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DriverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Directed path n1 -> n2 -> ... -> nN.
    Chain,
    /// Directed cycle closing the chain.
    Cycle,
    Complete,
    /// Two rails of length N joined by rungs.
    GridLadder,
    RandomGnp,
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Family, String> {
        match s {
            "chain" => Ok(Family::Chain),
            "cycle" => Ok(Family::Cycle),
            "complete" => Ok(Family::Complete),
            "grid-ladder" => Ok(Family::GridLadder),
            "random-gnp" => Ok(Family::RandomGnp),
            other => {
                Err(format!("unknown family `{other}` (expected chain, cycle, complete, grid-ladder, random-gnp)"))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub n: usize,
    pub p: f64,
    pub seed: Option<u64>,
    /// Number of `color` facts to add.
    pub colors: usize,
}

impl GenParams {
    pub fn new(n: usize) -> GenParams {
        GenParams { n, p: 0.5, seed: None, colors: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub nodes: Vec<String>,
    pub edges: Vec<(String, String)>,
    pub colors: Vec<String>,
}

impl Instance {
    /// Facts text for the graph and coloring schemas.
    pub fn facts(&self) -> String {
        let mut out = String::new();
        for v in &self.nodes {
            let _ = writeln!(out, "node({v}).");
        }
        for (a, b) in &self.edges {
            let _ = writeln!(out, "edge({a},{b}).");
        }
        for c in &self.colors {
            let _ = writeln!(out, "color({c}).");
        }
        out
    }
}

fn node(i: usize) -> String {
    format!("n{}", i + 1)
}

fn both(edges: &mut Vec<(String, String)>, a: usize, b: usize) {
    edges.push((node(a), node(b)));
    edges.push((node(b), node(a)));
}

/// Deterministic graph instance; undirected families store both directions.
pub fn gen_instance(family: Family, params: &GenParams) -> Result<Instance, DriverError> {
    let n = params.n;
    if n == 0 {
        return Err(DriverError::Gen("size must be positive".into()));
    }
    let mut edges = Vec::new();
    let count = match family {
        Family::Chain => {
            edges.extend((1..n).map(|i| (node(i - 1), node(i))));
            n
        }
        Family::Cycle => {
            edges.extend((0..n).map(|i| (node(i), node((i + 1) % n))));
            n
        }
        Family::Complete => {
            for a in 0..n {
                for b in a + 1..n {
                    both(&mut edges, a, b);
                }
            }
            n
        }
        Family::GridLadder => {
            // Rails are nodes 0..n and n..2n.
            for i in 0..n {
                if i + 1 < n {
                    both(&mut edges, i, i + 1);
                    both(&mut edges, n + i, n + i + 1);
                }
                both(&mut edges, i, n + i);
            }
            2 * n
        }
        Family::RandomGnp => {
            if !(0.0..=1.0).contains(&params.p) {
                return Err(DriverError::Gen(format!("probability {} outside [0,1]", params.p)));
            }
            let seed = params.seed.ok_or_else(|| DriverError::Gen("random-gnp needs a seed".into()))?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for a in 0..n {
                for b in a + 1..n {
                    if rng.gen_bool(params.p) {
                        both(&mut edges, a, b);
                    }
                }
            }
            n
        }
    };
    Ok(Instance {
        nodes: (0..count).map(node).collect(),
        edges,
        colors: (1..=params.colors).map(|i| format!("c{i}")).collect(),
    })
}
