//! NP Datalog: parse, analyze, evaluate, transpile to a constraint model,
//! optimize and solve.

pub mod analysis;
pub mod driver;
pub mod fixpoint;
pub mod frontend;
pub mod optimizer;
pub mod oracle;
pub mod solver;
pub mod transpile;
