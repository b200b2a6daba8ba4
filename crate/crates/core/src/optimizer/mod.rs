//! Model-to-model rewrites that keep the solution set: range restriction,
//! constraint simplification, array reduction and variable deletion.

mod array_reduction;
mod range_restriction;
mod simplify;
mod variable_deletion;

use std::fmt;
use std::str::FromStr;

use crate::frontend::Program;
use crate::transpile::{ConstraintModel, Term};

pub use array_reduction::{decode_value, pass_array_reduction};
pub use range_restriction::pass_range_restriction;
pub use simplify::{const_value, pass_constraint_simplify};
pub use variable_deletion::pass_variable_deletion;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pass {
    RangeRestriction,
    ConstraintSimplify,
    ArrayReduction,
    VariableDeletion,
}

/// The full pipeline in its fixed order.
pub const PIPELINE: [Pass; 5] = [
    Pass::RangeRestriction,
    Pass::ConstraintSimplify,
    Pass::ArrayReduction,
    Pass::VariableDeletion,
    Pass::ConstraintSimplify,
];

impl Pass {
    pub fn name(self) -> &'static str {
        match self {
            Pass::RangeRestriction => "range-restriction",
            Pass::ConstraintSimplify => "constraint-simplify",
            Pass::ArrayReduction => "array-reduction",
            Pass::VariableDeletion => "variable-deletion",
        }
    }

    pub fn apply(self, m: &ConstraintModel, p: &Program) -> ConstraintModel {
        match self {
            Pass::RangeRestriction => pass_range_restriction(m),
            Pass::ConstraintSimplify => pass_constraint_simplify(m),
            Pass::ArrayReduction => pass_array_reduction(m, p),
            Pass::VariableDeletion => pass_variable_deletion(m),
        }
    }
}

impl fmt::Display for Pass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pass {
    type Err = String;

    fn from_str(s: &str) -> Result<Pass, String> {
        match s.trim() {
            "rr" | "range-restriction" => Ok(Pass::RangeRestriction),
            "cs" | "constraint-simplify" => Ok(Pass::ConstraintSimplify),
            "ar" | "array-reduction" => Ok(Pass::ArrayReduction),
            "vd" | "variable-deletion" => Ok(Pass::VariableDeletion),
            other => Err(format!("unknown pass `{other}` (expected rr, cs, ar, vd)")),
        }
    }
}

/// `none`, `all`, or a comma list of pass names run in the given order.
pub fn parse_opt(spec: &str) -> Result<Vec<Pass>, String> {
    match spec.trim() {
        "none" | "" => Ok(Vec::new()),
        "all" => Ok(PIPELINE.to_vec()),
        list => list.split(',').map(str::parse).collect(),
    }
}

pub fn optimize(m: &ConstraintModel, p: &Program, passes: &[Pass]) -> ConstraintModel {
    passes.iter().fold(m.clone(), |acc, pass| pass.apply(&acc, p))
}

/// Factors of a product, or the term itself.
pub(crate) fn factors(t: &Term) -> Vec<Term> {
    match t {
        Term::Product(ts) => ts.clone(),
        other => vec![other.clone()],
    }
}
