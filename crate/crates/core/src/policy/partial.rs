use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;

use crate::task::{ActionId, FactId, FactSet, FondTask, State};

/// A partial truth assignment over the facts of a task.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialState {
    pos: FactSet,
    neg: FactSet,
}

impl PartialState {
    pub fn empty(width: usize) -> Self {
        PartialState {
            pos: FactSet::empty(width),
            neg: FactSet::empty(width),
        }
    }

    /// Builds from `(fact, value)` literals. Returns `None` if a fact is
    /// assigned both values.
    pub fn from_literals<I>(width: usize, literals: I) -> Option<Self>
    where
        I: IntoIterator<Item = (FactId, bool)>,
    {
        let mut p = PartialState::empty(width);
        for (f, v) in literals {
            if !p.assign(f, v) {
                return None;
            }
        }
        Some(p)
    }

    /// The full assignment of `state`.
    pub fn from_state(state: &State) -> Self {
        let width = state.width();
        let mut neg = FactSet::empty(width);
        for f in 0..width {
            if !state.holds(f) {
                neg.insert(f);
            }
        }
        PartialState {
            pos: state.facts().clone(),
            neg,
        }
    }

    /// Assigns `fact := value`; false if it already holds the opposite value.
    pub fn assign(&mut self, fact: FactId, value: bool) -> bool {
        let (this, other) = if value {
            (&mut self.pos, &self.neg)
        } else {
            (&mut self.neg, &self.pos)
        };
        if other.contains(fact) {
            return false;
        }
        this.insert(fact);
        true
    }

    pub fn width(&self) -> usize {
        self.pos.width()
    }

    pub fn get(&self, fact: FactId) -> Option<bool> {
        if self.pos.contains(fact) {
            Some(true)
        } else if self.neg.contains(fact) {
            Some(false)
        } else {
            None
        }
    }

    /// Number of assigned facts.
    pub fn len(&self) -> usize {
        self.pos.len() + self.neg.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pos.is_empty() && self.neg.is_empty()
    }

    /// Assigned literals in fact order.
    pub fn literals(&self) -> impl Iterator<Item = (FactId, bool)> + '_ {
        (0..self.width()).filter_map(|f| self.get(f).map(|v| (f, v)))
    }

    pub fn models(&self, state: &State) -> bool {
        self.pos.is_subset(state.facts()) && self.neg.is_disjoint(state.facts())
    }
}

impl fmt::Debug for PartialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (fact, v)) in self.literals().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}{}", if v { "" } else { "!" }, fact)?;
        }
        f.write_str("}")
    }
}

/// Result of looking a state up in a partial policy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Unmapped,
    Mapped(ActionId),
    /// Matching partial states disagree on the action.
    Buggy,
}

/// Mapping from partial states to actions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialPolicy {
    rules: BTreeMap<PartialState, ActionId>,
}

impl PartialPolicy {
    pub fn new() -> Self {
        PartialPolicy::default()
    }

    /// Adds a rule; returns the previous action if the partial state was
    /// already present.
    pub fn insert(&mut self, condition: PartialState, action: ActionId) -> Option<ActionId> {
        self.rules.insert(condition, action)
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PartialState, &ActionId)> {
        self.rules.iter()
    }

    /// The set of actions of all rules matching `state`, deduplicated.
    pub fn actions_at(&self, state: &State) -> Vec<ActionId> {
        let mut v: Vec<ActionId> = self
            .rules
            .iter()
            .filter(|(p, _)| p.models(state))
            .map(|(_, a)| *a)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Lazy per-state view of the decompressed policy.
    pub fn decide(&self, state: &State) -> Decision {
        let mut found = None;
        for (p, &a) in &self.rules {
            if p.models(state) {
                match found {
                    None => found = Some(a),
                    Some(b) if b != a => return Decision::Buggy,
                    _ => {}
                }
            }
        }
        found.map_or(Decision::Unmapped, Decision::Mapped)
    }

    /// Decompression restricted to the given states; goal states are never
    /// mapped. Returns the mapped part and the buggy states.
    pub fn decompress<'s, I>(&self, task: &FondTask, states: I) -> (BTreeMap<State, ActionId>, Vec<State>)
    where
        I: IntoIterator<Item = &'s State>,
    {
        let mut mapped = BTreeMap::new();
        let mut buggy = Vec::new();
        for s in states {
            if task.is_goal(s) {
                continue;
            }
            match self.decide(s) {
                Decision::Mapped(a) => {
                    mapped.insert(s.clone(), a);
                }
                Decision::Buggy => buggy.push(s.clone()),
                Decision::Unmapped => {}
            }
        }
        (mapped, buggy)
    }
}

/// Checks that the policy pruned to the states it reaches from init is a
/// strong-cyclic solution with no buggy state on the way.
pub fn validate_partial_solution(task: &FondTask, policy: &PartialPolicy) -> bool {
    let init = task.init().clone();
    let mut index: BTreeMap<State, usize> = BTreeMap::new();
    let mut states: Vec<State> = Vec::new();
    let mut edges: Vec<Vec<usize>> = Vec::new();
    let mut queue = VecDeque::new();
    index.insert(init.clone(), 0);
    states.push(init);
    edges.push(Vec::new());
    queue.push_back(0);
    while let Some(i) = queue.pop_front() {
        let s = states[i].clone();
        if task.is_goal(&s) {
            continue;
        }
        let a = match policy.decide(&s) {
            Decision::Mapped(a) => a,
            Decision::Buggy | Decision::Unmapped => return false,
        };
        let Ok(succ) = task.successors(&s, a) else {
            return false;
        };
        for t in succ {
            let j = match index.get(&t) {
                Some(&j) => j,
                None => {
                    let j = states.len();
                    index.insert(t.clone(), j);
                    states.push(t);
                    edges.push(Vec::new());
                    queue.push_back(j);
                    j
                }
            };
            edges[i].push(j);
        }
    }
    // Every reached state must be able to reach a goal.
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); states.len()];
    for (i, out) in edges.iter().enumerate() {
        for &j in out {
            preds[j].push(i);
        }
    }
    let mut alive: HashSet<usize> = (0..states.len()).filter(|&i| task.is_goal(&states[i])).collect();
    let mut queue: VecDeque<usize> = alive.iter().copied().collect();
    while let Some(j) = queue.pop_front() {
        for &i in &preds[j] {
            if alive.insert(i) {
                queue.push_back(i);
            }
        }
    }
    alive.len() == states.len()
}
