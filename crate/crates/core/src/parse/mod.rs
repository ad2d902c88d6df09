//! Task and policy readers/writers.
//!
//! Two task formats are supported: a STRIPS subset of FOND-PDDL (with
//! `oneof` effects) and a JSON explicit-graph format where each named state
//! becomes one fact. Policies round-trip through a JSON document.

mod explicit;
mod pddl;
mod pddl_writer;
mod policy_doc;
pub mod sexpr;

pub use explicit::{parse_explicit, ExplicitAction, ExplicitGraph, GOAL_MARKER};
pub use pddl::{parse_pddl, parse_pddl_with_cap, LiftedSchema, DEFAULT_GROUNDING_CAP};
pub use pddl_writer::write_pddl;
pub use policy_doc::{
    partial_policy_document, read_policy, read_policy_document, state_policy_document, task_hash, write_partial_policy,
    write_policy, Condition, PolicyDocument, PolicyKind, PolicyRecord, ReadPolicy,
};

use thiserror::Error;

use crate::task::TaskError;
use sexpr::Loc;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("parse error at {loc}: {message}")]
    Syntax { loc: Loc, message: String },
    #[error("unsupported feature: {0}")]
    UnsupportedFeature(String),
    #[error("grounding produced more than {cap} actions")]
    GroundingExplosion { cap: usize },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("reference to undeclared state `{0}`")]
    DanglingStateReference(String),
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl ParseError {
    pub(crate) fn syntax(loc: Loc, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            loc,
            message: message.into(),
        }
    }
}

impl From<sexpr::ReadError> for ParseError {
    fn from(e: sexpr::ReadError) -> Self {
        ParseError::Syntax {
            loc: e.loc,
            message: e.message,
        }
    }
}
