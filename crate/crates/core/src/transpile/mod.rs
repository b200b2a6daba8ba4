//! Translation of the non-deterministic component into a constraint model,
//! plus OPL text emission for models and fixpoint scripts.

mod fixp;
mod model;
mod opl;
mod translate;

pub use fixp::emit_fixp_script;
pub use model::*;
pub use opl::{emit_data, emit_opl};
pub use translate::{
    assemble_model, known_predicates, translate_constraint, translate_generalized_partition, translate_goal,
    translate_rule, translate_standard, translate_subset, Scope,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TranspileError {
    #[error("no signature for predicate `{0}`")]
    MissingSignature(String),
    #[error("variable `{0}` has no positive occurrence to take a domain from")]
    UnboundVariable(String),
    #[error("optimization goal `{0}` is not defined in the guessed component")]
    GoalOutsideP2(String),
    #[error("{0}")]
    Shape(String),
}
