//! Explicit state-space graphs encoded as FOND tasks.
//!
//! Every named state becomes one fact; an action `label` leaving `from`
//! requires that fact and has one effect per outcome. Tasks with a single
//! goal state use that state's fact as the goal. Otherwise an extra
//! `goal-reached` fact (partition 1) is added by every transition into a
//! goal state.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::ParseError;
use crate::task::{Action, ActionId, Effect, Fact, FactSet, FondTask, State, TaskKind};

pub const GOAL_MARKER: &str = "goal-reached";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitAction {
    pub label: String,
    pub from: String,
    pub outcomes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitGraph {
    pub states: Vec<String>,
    pub init: String,
    pub goals: Vec<String>,
    pub actions: Vec<ExplicitAction>,
}

impl ExplicitGraph {
    /// Whether the task gets a `goal-reached` marker fact: goals listed
    /// more than once count once.
    fn has_marker(&self) -> bool {
        let distinct: HashSet<&str> = self.goals.iter().map(String::as_str).collect();
        distinct.len() != 1
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("explicit graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ParseError> {
        serde_json::from_str(text).map_err(|e| ParseError::Schema(e.to_string()))
    }

    fn validate(&self) -> Result<HashMap<&str, usize>, ParseError> {
        let mut index = HashMap::new();
        for (i, s) in self.states.iter().enumerate() {
            if s.is_empty() {
                return Err(ParseError::Schema("state names must be non-empty".into()));
            }
            if index.insert(s.as_str(), i).is_some() {
                return Err(ParseError::Schema(format!("duplicate state `{s}`")));
            }
        }
        if self.has_marker() && index.contains_key(GOAL_MARKER) {
            return Err(ParseError::Schema(format!("state name `{GOAL_MARKER}` is reserved")));
        }
        let known = |n: &str| {
            index
                .contains_key(n)
                .then_some(())
                .ok_or_else(|| ParseError::DanglingStateReference(n.to_string()))
        };
        known(&self.init)?;
        for g in &self.goals {
            known(g)?;
        }
        let mut seen = HashSet::new();
        for a in &self.actions {
            known(&a.from)?;
            if a.outcomes.is_empty() {
                return Err(ParseError::Schema(format!(
                    "action `{}` from `{}` has no outcomes",
                    a.label, a.from
                )));
            }
            for o in &a.outcomes {
                known(o)?;
            }
            if !seen.insert((a.label.as_str(), a.from.as_str())) {
                return Err(ParseError::Schema(format!(
                    "duplicate action `{}` from `{}`",
                    a.label, a.from
                )));
            }
        }
        Ok(index)
    }

    pub fn to_task(&self) -> Result<FondTask, ParseError> {
        let index = self.validate()?;
        let goal_idx: Vec<usize> = {
            let mut g: Vec<usize> = self.goals.iter().map(|n| index[n.as_str()]).collect();
            g.sort_unstable();
            g.dedup();
            g
        };
        let marker = self.has_marker().then_some(self.states.len());
        let width = self.states.len() + usize::from(marker.is_some());

        let mut facts: Vec<Fact> = self
            .states
            .iter()
            .enumerate()
            .map(|(i, n)| Fact {
                id: i,
                name: n.clone(),
                partition: 0,
            })
            .collect();
        if let Some(m) = marker {
            facts.push(Fact {
                id: m,
                name: GOAL_MARKER.into(),
                partition: 1,
            });
        }
        let is_goal = |i: usize| goal_idx.binary_search(&i).is_ok();

        let mut labels: Vec<&str> = Vec::new();
        let mut actions = Vec::with_capacity(self.actions.len());
        for (i, a) in self.actions.iter().enumerate() {
            let partition = match labels.iter().position(|l| *l == a.label) {
                Some(p) => p,
                None => {
                    labels.push(&a.label);
                    labels.len() - 1
                }
            } as u32;
            let from = index[a.from.as_str()];
            let mut effects: Vec<Effect> = Vec::new();
            for o in &a.outcomes {
                let to = index[o.as_str()];
                let eff = if to == from {
                    Effect::identity(width)
                } else {
                    let mut add = FactSet::from_facts(width, [to]);
                    if let (Some(m), true) = (marker, is_goal(to)) {
                        add.insert(m);
                    }
                    Effect::new(FactSet::from_facts(width, [from]), add)
                };
                if !effects.contains(&eff) {
                    effects.push(eff);
                }
            }
            actions.push(Action {
                id: ActionId(i as u32),
                name: a.label.clone(),
                pre: FactSet::from_facts(width, [from]),
                effects,
                partition,
            });
        }

        let init_idx = index[self.init.as_str()];
        let mut init = State::from_facts(width, [init_idx]);
        let goal = match marker {
            None => FactSet::from_facts(width, [goal_idx[0]]),
            Some(m) => {
                if is_goal(init_idx) {
                    init.set(m, true);
                }
                FactSet::from_facts(width, [m])
            }
        };
        Ok(FondTask::new(facts, actions, init, goal, TaskKind::ExplicitGraph)?)
    }

    /// The task state corresponding to a named graph state.
    pub fn state(&self, task: &FondTask, name: &str) -> Option<State> {
        let i = self.states.iter().position(|s| s == name)?;
        let mut s = State::from_facts(task.num_facts(), [i]);
        if self.has_marker() && self.goals.iter().any(|g| g == name) {
            s.set(self.states.len(), true);
        }
        Some(s)
    }
}

pub fn parse_explicit(json_text: &str) -> Result<FondTask, ParseError> {
    ExplicitGraph::from_json(json_text)?.to_task()
}
