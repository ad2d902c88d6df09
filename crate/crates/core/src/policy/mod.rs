//! Policies over task states and partial-state policies.

mod partial;
#[allow(clippy::module_inception)]
mod policy;
mod space;

pub use partial::{validate_partial_solution, Decision, PartialPolicy, PartialState};
pub use policy::{Policy, StatePolicy};
pub use space::{StateId, StateSpace};

use thiserror::Error;

use crate::task::{ActionId, TaskError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolicyError {
    #[error("state is already mapped")]
    AlreadyMapped,
    #[error("action {0} is not applicable")]
    NotApplicable(ActionId),
    #[error("goal states cannot be mapped")]
    GoalStateMapped,
    #[error("state is not in the policy domain")]
    NotInDomain,
}

impl From<TaskError> for PolicyError {
    fn from(e: TaskError) -> Self {
        match e {
            TaskError::NotApplicable { action } => PolicyError::NotApplicable(action),
            TaskError::Invalid(_) => unreachable!("task was validated at construction"),
        }
    }
}
