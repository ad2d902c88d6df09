use crate::policy::{Policy, StateId, StateSpace};
use crate::task::ActionId;

/// Chooses which remain state a policy maps next and in which order the
/// successors are generated.
pub trait ExpansionOrder {
    fn select(&mut self, space: &StateSpace<'_>, policy: &Policy) -> Option<StateId>;

    /// Reorders `actions` (given in id order) in place.
    fn order_actions(&mut self, _space: &StateSpace<'_>, _state: StateId, _actions: &mut Vec<ActionId>) {}
}

/// Maps the most recently added remain state; actions in id order.
#[derive(Clone, Copy, Debug, Default)]
pub struct MostRecent;

impl ExpansionOrder for MostRecent {
    fn select(&mut self, _space: &StateSpace<'_>, policy: &Policy) -> Option<StateId> {
        policy.remain().last().copied()
    }
}

/// A fixed preference list read from text, one entry per line:
///
/// ```text
/// # comment
/// D d_R d_L
/// B
/// ```
///
/// The first listed state present in remain is mapped; if none is present
/// the most recent remain state is. Listed actions are generated first, in
/// the given order, followed by the rest in id order.
#[derive(Clone, Debug, Default)]
pub struct ScriptedOrder {
    entries: Vec<(String, Vec<String>)>,
}

impl ScriptedOrder {
    pub fn parse(text: &str) -> Self {
        let entries = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .map(|l| {
                let mut words = l.split_whitespace().map(str::to_string);
                let state = words.next().expect("non-empty line");
                (state, words.collect())
            })
            .collect();
        ScriptedOrder { entries }
    }

    fn entry(&self, space: &StateSpace<'_>, state: StateId) -> Option<&(String, Vec<String>)> {
        let label = space.task().state_label(&space.state(state));
        self.entries.iter().find(|(name, _)| *name == label)
    }
}

impl ExpansionOrder for ScriptedOrder {
    fn select(&mut self, space: &StateSpace<'_>, policy: &Policy) -> Option<StateId> {
        let labels: Vec<(StateId, String)> = policy
            .remain()
            .iter()
            .map(|&s| (s, space.task().state_label(&space.state(s))))
            .collect();
        for (name, _) in &self.entries {
            if let Some((s, _)) = labels.iter().find(|(_, l)| l == name) {
                return Some(*s);
            }
        }
        policy.remain().last().copied()
    }

    fn order_actions(&mut self, space: &StateSpace<'_>, state: StateId, actions: &mut Vec<ActionId>) {
        let Some((_, wanted)) = self.entry(space, state) else {
            return;
        };
        let task = space.task();
        let rank = |a: &ActionId| {
            wanted
                .iter()
                .position(|w| *w == task.action(*a).name)
                .unwrap_or(wanted.len())
        };
        actions.sort_by_key(|a| (rank(a), *a));
    }
}
