use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use indexmap::IndexSet;

use super::space::{StateId, StateSpace};
use super::PolicyError;
use crate::task::{ActionId, FondTask, State};

/// A partial mapping from non-goal states to applicable actions, with the
/// reach/front/remain structure maintained incrementally.
///
/// `extend` returns a new value; the parent is left untouched so sibling
/// policies in a search queue never alias.
#[derive(Clone, Debug)]
pub struct Policy {
    order: Vec<(StateId, ActionId)>,
    map: HashMap<StateId, ActionId>,
    reach: HashSet<StateId>,
    front: IndexSet<StateId>,
    remain: IndexSet<StateId>,
    proper: bool,
}

impl Policy {
    pub fn empty(space: &StateSpace<'_>) -> Self {
        let mut remain = IndexSet::new();
        if !space.is_goal(space.init()) {
            remain.insert(space.init());
        }
        Policy {
            order: Vec::new(),
            map: HashMap::new(),
            reach: HashSet::new(),
            front: IndexSet::new(),
            remain,
            proper: true,
        }
    }

    /// Builds a policy by extending the empty policy in the given order.
    pub fn from_mappings<I>(space: &StateSpace<'_>, mappings: I) -> Result<Self, PolicyError>
    where
        I: IntoIterator<Item = (StateId, ActionId)>,
    {
        let mut p = Policy::empty(space);
        for (s, a) in mappings {
            p = p.extend(space, s, a)?;
        }
        Ok(p)
    }

    pub fn from_state_policy(space: &StateSpace<'_>, policy: &StatePolicy) -> Result<Self, PolicyError> {
        Policy::from_mappings(space, policy.iter().map(|(s, a)| (space.intern(s), *a)))
    }

    fn check_extension(&self, space: &StateSpace<'_>, state: StateId, action: ActionId) -> Result<(), PolicyError> {
        if self.map.contains_key(&state) {
            return Err(PolicyError::AlreadyMapped);
        }
        if space.is_goal(state) {
            return Err(PolicyError::GoalStateMapped);
        }
        if !space.is_applicable(state, action) {
            return Err(PolicyError::NotApplicable(action));
        }
        Ok(())
    }

    pub fn extend(&self, space: &StateSpace<'_>, state: StateId, action: ActionId) -> Result<Policy, PolicyError> {
        self.check_extension(space, state, action)?;
        let succ = space.successors(state, action)?;
        let mut next = self.clone();
        next.order.push((state, action));
        next.map.insert(state, action);
        next.reach.insert(state);
        next.front.shift_remove(&state);
        next.remain.shift_remove(&state);
        for &t in succ.iter() {
            if next.reach.insert(t) && !next.map.contains_key(&t) {
                next.front.insert(t);
                if !space.is_goal(t) {
                    next.remain.insert(t);
                }
            }
        }
        // A deadlock never disappears when more states are mapped, and a
        // proper parent only needs the new state to escape.
        next.proper = self.proper && next.reaches_front(space, state);
        Ok(next)
    }

    /// True iff `extend(state, action)` would not be proper. Requires a proper
    /// receiver.
    pub fn deadlock_on_extend(
        &self,
        space: &StateSpace<'_>,
        state: StateId,
        action: ActionId,
    ) -> Result<bool, PolicyError> {
        debug_assert!(self.proper, "deadlock_on_extend needs a proper policy");
        Ok(!self.extend(space, state, action)?.proper)
    }

    fn reaches_front(&self, space: &StateSpace<'_>, from: StateId) -> bool {
        let mut seen = HashSet::from([from]);
        let mut queue = VecDeque::from([from]);
        while let Some(s) = queue.pop_front() {
            let Some(&a) = self.map.get(&s) else {
                return true;
            };
            for &t in space.successors(s, a).expect("mapped action is applicable").iter() {
                if seen.insert(t) {
                    queue.push_back(t);
                }
            }
        }
        false
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Mappings in insertion order.
    pub fn mappings(&self) -> &[(StateId, ActionId)] {
        &self.order
    }

    pub fn domain(&self) -> impl Iterator<Item = StateId> + '_ {
        self.order.iter().map(|(s, _)| *s)
    }

    pub fn action_at(&self, state: StateId) -> Option<ActionId> {
        self.map.get(&state).copied()
    }

    pub fn contains(&self, state: StateId) -> bool {
        self.map.contains_key(&state)
    }

    pub fn reach(&self) -> &HashSet<StateId> {
        &self.reach
    }

    /// Frontier states in order of first appearance.
    pub fn front(&self) -> &IndexSet<StateId> {
        &self.front
    }

    /// Non-goal frontier states plus an unhandled initial state, in order of
    /// first appearance. The last element is the most recently added.
    pub fn remain(&self) -> &IndexSet<StateId> {
        &self.remain
    }

    pub fn is_proper(&self) -> bool {
        self.proper
    }

    pub fn is_solution(&self) -> bool {
        self.proper && self.remain.is_empty()
    }

    /// Properness by backward propagation from the frontier, independent of
    /// the incremental flag.
    pub fn is_proper_full(&self, space: &StateSpace<'_>) -> bool {
        let mut preds: HashMap<StateId, Vec<StateId>> = HashMap::new();
        let mut escaping: HashSet<StateId> = HashSet::new();
        let mut queue = VecDeque::new();
        for (&s, &a) in &self.map {
            for &t in space.successors(s, a).expect("mapped action is applicable").iter() {
                preds.entry(t).or_default().push(s);
                if !self.map.contains_key(&t) && escaping.insert(s) {
                    queue.push_back(s);
                }
            }
        }
        while let Some(t) = queue.pop_front() {
            for &p in preds.get(&t).map(Vec::as_slice).unwrap_or(&[]) {
                if escaping.insert(p) {
                    queue.push_back(p);
                }
            }
        }
        escaping.len() == self.map.len()
    }

    /// Frontier states reachable from `state` along policy trajectories.
    pub fn escape_set(&self, space: &StateSpace<'_>, state: StateId) -> Result<BTreeSet<StateId>, PolicyError> {
        if !self.map.contains_key(&state) {
            return Err(PolicyError::NotInDomain);
        }
        let mut seen = HashSet::from([state]);
        let mut queue = VecDeque::from([state]);
        let mut out = BTreeSet::new();
        while let Some(s) = queue.pop_front() {
            match self.map.get(&s) {
                None => {
                    out.insert(s);
                }
                Some(&a) => {
                    for &t in space.successors(s, a)?.iter() {
                        if seen.insert(t) {
                            queue.push_back(t);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Escape set of every domain state.
    pub fn lanes(&self, space: &StateSpace<'_>) -> BTreeMap<StateId, BTreeSet<StateId>> {
        self.map
            .keys()
            .map(|&s| (s, self.escape_set(space, s).expect("domain state")))
            .collect()
    }

    /// Restriction of the policy to the domain states in `keep`.
    pub fn slice(&self, space: &StateSpace<'_>, keep: &HashSet<StateId>) -> Policy {
        Policy::from_mappings(space, self.order.iter().copied().filter(|(s, _)| keep.contains(s)))
            .expect("sub-mapping of a valid policy")
    }

    /// States reachable from `from` (inclusive) under the policy.
    pub fn reach_from(&self, space: &StateSpace<'_>, from: StateId) -> HashSet<StateId> {
        let mut seen = HashSet::from([from]);
        let mut queue = VecDeque::from([from]);
        while let Some(s) = queue.pop_front() {
            if let Some(&a) = self.map.get(&s) {
                for &t in space.successors(s, a).expect("mapped action is applicable").iter() {
                    if seen.insert(t) {
                        queue.push_back(t);
                    }
                }
            }
        }
        seen
    }

    /// Full mapping sorted by state id; the identity equivalence key.
    pub fn sorted_mappings(&self) -> Vec<(StateId, ActionId)> {
        let mut v = self.order.clone();
        v.sort_unstable();
        v
    }

    pub fn to_state_policy(&self, space: &StateSpace<'_>) -> StatePolicy {
        StatePolicy(self.order.iter().map(|&(s, a)| (space.state(s), a)).collect())
    }
}

/// A state-level policy detached from any state space, ordered by ≺.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StatePolicy(BTreeMap<State, ActionId>);

impl StatePolicy {
    pub fn new() -> Self {
        StatePolicy::default()
    }

    pub fn insert(&mut self, state: State, action: ActionId) -> Option<ActionId> {
        self.0.insert(state, action)
    }

    pub fn get(&self, state: &State) -> Option<ActionId> {
        self.0.get(state).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&State, &ActionId)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn states(&self) -> impl Iterator<Item = &State> {
        self.0.keys()
    }

    /// reach(π) \ domain(π), assuming every mapped action is applicable.
    pub fn front(&self, task: &FondTask) -> BTreeSet<State> {
        let mut out = BTreeSet::new();
        for (s, &a) in &self.0 {
            if let Ok(succ) = task.successors(s, a) {
                out.extend(succ.into_iter().filter(|t| !self.0.contains_key(t)));
            }
        }
        out
    }
}

impl FromIterator<(State, ActionId)> for StatePolicy {
    fn from_iter<T: IntoIterator<Item = (State, ActionId)>>(iter: T) -> Self {
        StatePolicy(iter.into_iter().collect())
    }
}
