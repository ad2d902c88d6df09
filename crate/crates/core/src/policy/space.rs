use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::Arc;

use parking_lot::RwLock;

use crate::task::{ActionId, FondTask, State, TaskError};

/// Dense handle for a state interned in a [`StateSpace`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub u32);

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Default)]
struct Inner {
    states: Vec<State>,
    ids: HashMap<State, StateId>,
    goal: Vec<bool>,
    applicable: Vec<Option<Arc<[ActionId]>>>,
    successors: HashMap<(StateId, ActionId), Arc<[StateId]>>,
}

/// Lazily explored state space of a task. States are interned on first
/// sight; applicability and successor lists are memoized. The initial state
/// always has id 0.
pub struct StateSpace<'t> {
    task: &'t FondTask,
    inner: RwLock<Inner>,
}

impl<'t> StateSpace<'t> {
    pub fn new(task: &'t FondTask) -> Self {
        let space = StateSpace {
            task,
            inner: RwLock::new(Inner::default()),
        };
        space.intern(task.init());
        space
    }

    pub fn task(&self) -> &'t FondTask {
        self.task
    }

    pub fn init(&self) -> StateId {
        StateId(0)
    }

    pub fn len(&self) -> usize {
        self.inner.read().states.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn intern(&self, state: &State) -> StateId {
        if let Some(&id) = self.inner.read().ids.get(state) {
            return id;
        }
        let mut inner = self.inner.write();
        if let Some(&id) = inner.ids.get(state) {
            return id;
        }
        let id = StateId(inner.states.len() as u32);
        inner.states.push(state.clone());
        inner.goal.push(self.task.is_goal(state));
        inner.applicable.push(None);
        inner.ids.insert(state.clone(), id);
        id
    }

    pub fn lookup(&self, state: &State) -> Option<StateId> {
        self.inner.read().ids.get(state).copied()
    }

    pub fn state(&self, id: StateId) -> State {
        self.inner.read().states[id.index()].clone()
    }

    pub fn is_goal(&self, id: StateId) -> bool {
        self.inner.read().goal[id.index()]
    }

    /// Compares two interned states under the task's total order ≺.
    pub fn cmp_states(&self, a: StateId, b: StateId) -> Ordering {
        let inner = self.inner.read();
        inner.states[a.index()].cmp(&inner.states[b.index()])
    }

    pub fn applicable(&self, id: StateId) -> Arc<[ActionId]> {
        if let Some(a) = &self.inner.read().applicable[id.index()] {
            return a.clone();
        }
        let state = self.state(id);
        let list: Arc<[ActionId]> = self.task.applicable_actions(&state).collect();
        self.inner.write().applicable[id.index()] = Some(list.clone());
        list
    }

    pub fn is_applicable(&self, id: StateId, action: ActionId) -> bool {
        self.applicable(id).contains(&action)
    }

    /// Successor ids of `action` at `id`, ordered by ≺ of the states.
    pub fn successors(&self, id: StateId, action: ActionId) -> Result<Arc<[StateId]>, TaskError> {
        if let Some(s) = self.inner.read().successors.get(&(id, action)) {
            return Ok(s.clone());
        }
        let state = self.state(id);
        let succ = self.task.successors(&state, action)?;
        let ids: Arc<[StateId]> = succ.iter().map(|s| self.intern(s)).collect();
        self.inner.write().successors.insert((id, action), ids.clone());
        Ok(ids)
    }
}

impl std::fmt::Debug for StateSpace<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StateSpace").field("states", &self.len()).finish()
    }
}
