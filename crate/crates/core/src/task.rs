//! Grounded FOND tasks: facts, states, non-deterministic actions and their
//! transition semantics.

use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;
use thiserror::Error;

pub type FactId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionId(pub u32);

impl ActionId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TaskError {
    #[error("action {action} is not applicable in the given state")]
    NotApplicable { action: ActionId },
    #[error("invalid task: {0}")]
    Invalid(String),
}

/// Fixed-width set of fact ids.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FactSet {
    width: usize,
    blocks: SmallVec<[u64; 2]>,
}

impl FactSet {
    pub fn empty(width: usize) -> Self {
        FactSet {
            width,
            blocks: SmallVec::from_elem(0, width.div_ceil(64).max(1)),
        }
    }

    pub fn from_facts<I: IntoIterator<Item = FactId>>(width: usize, facts: I) -> Self {
        let mut set = FactSet::empty(width);
        for f in facts {
            set.insert(f);
        }
        set
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn contains(&self, f: FactId) -> bool {
        f < self.width && self.blocks[f / 64] >> (f % 64) & 1 == 1
    }

    pub fn insert(&mut self, f: FactId) {
        assert!(f < self.width, "fact {f} out of range (width {})", self.width);
        self.blocks[f / 64] |= 1 << (f % 64);
    }

    pub fn remove(&mut self, f: FactId) {
        if f < self.width {
            self.blocks[f / 64] &= !(1 << (f % 64));
        }
    }

    pub fn set(&mut self, f: FactId, value: bool) {
        if value {
            self.insert(f)
        } else {
            self.remove(f)
        }
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    pub fn is_subset(&self, other: &FactSet) -> bool {
        self.blocks.iter().zip(other.blocks.iter()).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &FactSet) -> bool {
        self.blocks.iter().zip(other.blocks.iter()).all(|(a, b)| a & b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = FactId> + '_ {
        (0..self.width).filter(move |&f| self.contains(f))
    }

    fn apply(&self, effect: &Effect) -> FactSet {
        let mut out = self.clone();
        for ((b, d), a) in out
            .blocks
            .iter_mut()
            .zip(effect.del.blocks.iter())
            .zip(effect.add.blocks.iter())
        {
            *b = (*b & !d) | a;
        }
        out
    }
}

impl fmt::Debug for FactSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A complete truth valuation over the task's facts.
///
/// States are totally ordered: the bit vector is read as an unsigned number
/// whose most significant bit is the highest fact id.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct State(FactSet);

impl State {
    pub fn empty(width: usize) -> Self {
        State(FactSet::empty(width))
    }

    pub fn from_facts<I: IntoIterator<Item = FactId>>(width: usize, facts: I) -> Self {
        State(FactSet::from_facts(width, facts))
    }

    pub fn width(&self) -> usize {
        self.0.width
    }

    pub fn holds(&self, f: FactId) -> bool {
        self.0.contains(f)
    }

    pub fn set(&mut self, f: FactId, value: bool) {
        self.0.set(f, value)
    }

    pub fn facts(&self) -> &FactSet {
        &self.0
    }

    pub fn true_facts(&self) -> impl Iterator<Item = FactId> + '_ {
        self.0.iter()
    }

    /// Packs the state into an integer; only meaningful for width ≤ 64.
    pub fn to_bits(&self) -> u64 {
        self.0.blocks[0]
    }

    pub fn from_bits(width: usize, bits: u64) -> Self {
        assert!(width <= 64);
        let mut s = State::empty(width);
        let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
        s.0.blocks[0] = bits & mask;
        s
    }
}

impl Ord for FactSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.width
            .cmp(&other.width)
            .then_with(|| self.blocks.iter().rev().cmp(other.blocks.iter().rev()))
    }
}

impl PartialOrd for FactSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "State")?;
        self.0.fmt(f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Effect {
    pub del: FactSet,
    pub add: FactSet,
}

impl Effect {
    pub fn new(del: FactSet, add: FactSet) -> Self {
        Effect { del, add }
    }

    pub fn identity(width: usize) -> Self {
        Effect {
            del: FactSet::empty(width),
            add: FactSet::empty(width),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fact {
    pub id: FactId,
    pub name: String,
    pub partition: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Action {
    pub id: ActionId,
    pub name: String,
    pub pre: FactSet,
    pub effects: Vec<Effect>,
    /// Lifted-schema id; structural symmetries never mix partitions.
    pub partition: u32,
}

/// Where a task came from. Explicit-graph tasks use one fact per named
/// state, which lets policy documents refer to states by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaskKind {
    Strips,
    ExplicitGraph,
}

#[derive(Clone, Debug)]
pub struct FondTask {
    facts: Vec<Fact>,
    actions: Vec<Action>,
    init: State,
    goal: FactSet,
    kind: TaskKind,
}

impl FondTask {
    pub fn new(
        facts: Vec<Fact>,
        actions: Vec<Action>,
        init: State,
        goal: FactSet,
        kind: TaskKind,
    ) -> Result<Self, TaskError> {
        let width = facts.len();
        for (i, f) in facts.iter().enumerate() {
            if f.id != i {
                return Err(TaskError::Invalid(format!(
                    "fact ids must be contiguous, found {} at position {i}",
                    f.id
                )));
            }
        }
        if init.width() != width || goal.width() != width {
            return Err(TaskError::Invalid("state width does not match fact count".into()));
        }
        for (i, a) in actions.iter().enumerate() {
            if a.id.index() != i {
                return Err(TaskError::Invalid(format!(
                    "action ids must be contiguous, found {} at position {i}",
                    a.id
                )));
            }
            if a.effects.is_empty() {
                return Err(TaskError::Invalid(format!("action {} has no effects", a.name)));
            }
            if a.pre.width() != width {
                return Err(TaskError::Invalid(format!("action {} precondition width", a.name)));
            }
            for e in &a.effects {
                if e.del.width() != width || e.add.width() != width {
                    return Err(TaskError::Invalid(format!("action {} effect width", a.name)));
                }
                if !e.del.is_disjoint(&e.add) {
                    return Err(TaskError::Invalid(format!(
                        "action {} has an effect adding and deleting the same fact",
                        a.name
                    )));
                }
            }
        }
        Ok(FondTask {
            facts,
            actions,
            init,
            goal,
            kind,
        })
    }

    pub fn facts(&self) -> &[Fact] {
        &self.facts
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn action(&self, id: ActionId) -> &Action {
        &self.actions[id.index()]
    }

    pub fn init(&self) -> &State {
        &self.init
    }

    pub fn goal(&self) -> &FactSet {
        &self.goal
    }

    pub fn kind(&self) -> TaskKind {
        self.kind
    }

    pub fn num_facts(&self) -> usize {
        self.facts.len()
    }

    pub fn fact_by_name(&self, name: &str) -> Option<FactId> {
        self.facts.iter().position(|f| f.name == name)
    }

    pub fn action_ids(&self) -> impl Iterator<Item = ActionId> {
        (0..self.actions.len() as u32).map(ActionId)
    }

    pub fn applicable(&self, state: &State, action: ActionId) -> bool {
        self.action(action).pre.is_subset(state.facts())
    }

    pub fn applicable_actions<'a>(&'a self, state: &'a State) -> impl Iterator<Item = ActionId> + 'a {
        self.action_ids().filter(move |&a| self.applicable(state, a))
    }

    /// Outcome states of `action` at `state`, deduplicated and sorted by ≺.
    pub fn successors(&self, state: &State, action: ActionId) -> Result<Vec<State>, TaskError> {
        if !self.applicable(state, action) {
            return Err(TaskError::NotApplicable { action });
        }
        let mut out: Vec<State> = self
            .action(action)
            .effects
            .iter()
            .map(|e| State(state.0.apply(e)))
            .collect();
        out.sort();
        out.dedup();
        Ok(out)
    }

    pub fn is_goal(&self, state: &State) -> bool {
        self.goal.is_subset(state.facts())
    }

    /// All transitions out of `state`.
    pub fn transitions_from(&self, state: &State) -> Vec<Transition> {
        let mut out = Vec::new();
        for a in self.applicable_actions(state) {
            for tail in self.successors(state, a).expect("applicable") {
                out.push(Transition {
                    head: state.clone(),
                    action: a,
                    tail,
                });
            }
        }
        out
    }

    /// Human-readable rendering of a state: its true facts, or for explicit
    /// graphs the single state name.
    pub fn state_label(&self, state: &State) -> String {
        if self.kind == TaskKind::ExplicitGraph {
            let mut named = state.true_facts().filter(|&f| self.facts[f].partition == 0);
            if let (Some(f), None) = (named.next(), named.next()) {
                return self.facts[f].name.clone();
            }
        }
        let names: Vec<&str> = state.true_facts().map(|f| self.facts[f].name.as_str()).collect();
        format!("{{{}}}", names.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub head: State,
    pub action: ActionId,
    pub tail: State,
}
