//! Structural symmetries of a task and state signatures built on them.
//!
//! A structural symmetry permutes facts and actions together, keeping the
//! goal, preconditions, effect multisets and both partitions intact. Such a
//! permutation maps the transition system onto itself, so symmetric states
//! are interchangeable for planning purposes.

mod pdg;

pub use pdg::{automorphism_generators, EdgeLabel, Pdg, VertexColor};

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use parking_lot::RwLock;
use thiserror::Error;

use crate::search::StateSignature;
use crate::task::{ActionId, Effect, FactId, FactSet, FondTask, State};

pub const DEFAULT_ORBIT_BUDGET: usize = 10_000;
pub const DEFAULT_TIME_BUDGET: Duration = Duration::from_secs(5);

#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
#[error("orbit exceeds {cap} states")]
pub struct OrbitBudgetExceeded {
    pub cap: usize,
}

/// A permutation of facts together with one of actions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    facts: Vec<FactId>,
    actions: Vec<ActionId>,
}

impl Permutation {
    /// `None` unless both maps are bijections.
    pub fn new(facts: Vec<FactId>, actions: Vec<ActionId>) -> Option<Self> {
        fn bijective(img: impl Iterator<Item = usize>, n: usize) -> bool {
            let mut seen = vec![false; n];
            img.into_iter().all(|i| i < n && !std::mem::replace(&mut seen[i], true))
        }
        (bijective(facts.iter().copied(), facts.len()) && bijective(actions.iter().map(|a| a.index()), actions.len()))
            .then_some(Permutation { facts, actions })
    }

    pub fn identity(task: &FondTask) -> Self {
        Permutation {
            facts: (0..task.num_facts()).collect(),
            actions: task.action_ids().collect(),
        }
    }

    pub fn fact(&self, f: FactId) -> FactId {
        self.facts[f]
    }

    pub fn action(&self, a: ActionId) -> ActionId {
        self.actions[a.index()]
    }

    pub fn is_identity(&self) -> bool {
        self.facts.iter().enumerate().all(|(i, &f)| i == f)
            && self.actions.iter().enumerate().all(|(i, a)| i == a.index())
    }

    pub fn num_facts(&self) -> usize {
        self.facts.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn apply_set(&self, set: &FactSet) -> FactSet {
        FactSet::from_facts(set.width(), set.iter().map(|f| self.facts[f]))
    }

    pub fn apply(&self, state: &State) -> State {
        State::from_facts(state.width(), state.true_facts().map(|f| self.facts[f]))
    }

    pub fn inverse(&self) -> Permutation {
        let mut facts = vec![0; self.facts.len()];
        for (i, &f) in self.facts.iter().enumerate() {
            facts[f] = i;
        }
        let mut actions = vec![ActionId(0); self.actions.len()];
        for (i, a) in self.actions.iter().enumerate() {
            actions[a.index()] = ActionId(i as u32);
        }
        Permutation { facts, actions }
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation {
            facts: other.facts.iter().map(|&f| self.facts[f]).collect(),
            actions: other.actions.iter().map(|&a| self.action(a)).collect(),
        }
    }
}

fn effect_key(e: &Effect) -> (Vec<FactId>, Vec<FactId>) {
    (e.del.iter().collect(), e.add.iter().collect())
}

/// Whether `sigma` is a structural symmetry of `task`.
pub fn check_symmetry(task: &FondTask, sigma: &Permutation) -> bool {
    if sigma.num_facts() != task.num_facts() || sigma.num_actions() != task.actions().len() {
        return false;
    }
    let facts_ok = task.facts().iter().all(|f| {
        let g = sigma.fact(f.id);
        task.goal().contains(f.id) == task.goal().contains(g) && f.partition == task.facts()[g].partition
    });
    facts_ok
        && task.actions().iter().all(|a| {
            let b = task.action(sigma.action(a.id));
            if a.partition != b.partition || sigma.apply_set(&a.pre) != b.pre {
                return false;
            }
            let mut mapped: Vec<_> = a
                .effects
                .iter()
                .map(|e| effect_key(&Effect::new(sigma.apply_set(&e.del), sigma.apply_set(&e.add))))
                .collect();
            let mut target: Vec<_> = b.effects.iter().map(effect_key).collect();
            mapped.sort_unstable();
            target.sort_unstable();
            mapped == target
        })
}

/// Generators of the structural symmetry group; the identity is implicit.
#[derive(Clone, Debug, Default)]
pub struct PermutationGroup {
    generators: Vec<Permutation>,
    /// Set when discovery ran out of time; the group is then trivial.
    pub timed_out: bool,
}

impl PermutationGroup {
    pub fn trivial() -> Self {
        PermutationGroup::default()
    }

    pub fn from_generators(generators: Vec<Permutation>) -> Self {
        PermutationGroup {
            generators: generators.into_iter().filter(|g| !g.is_identity()).collect(),
            timed_out: false,
        }
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn is_trivial(&self) -> bool {
        self.generators.is_empty()
    }

    /// Orbit of `state`, breadth-first over generator images.
    pub fn orbit(&self, state: &State, cap: usize) -> Result<Vec<State>, OrbitBudgetExceeded> {
        let mut seen = HashSet::from([state.clone()]);
        let mut out = vec![state.clone()];
        let mut queue = VecDeque::from([state.clone()]);
        while let Some(s) = queue.pop_front() {
            for g in &self.generators {
                let t = g.apply(&s);
                if seen.insert(t.clone()) {
                    if out.len() >= cap {
                        return Err(OrbitBudgetExceeded { cap });
                    }
                    out.push(t.clone());
                    queue.push_back(t);
                }
            }
        }
        Ok(out)
    }
}

/// Generators of the task's structural symmetries, found as automorphisms
/// of its problem description graph. Returns the trivial group, flagged,
/// if `budget` runs out.
pub fn find_generators(task: &FondTask, budget: Option<Duration>) -> PermutationGroup {
    let pdg = Pdg::new(task);
    let Some(maps) = automorphism_generators(&pdg, budget) else {
        return PermutationGroup {
            generators: Vec::new(),
            timed_out: true,
        };
    };
    let mut gens: Vec<Permutation> = Vec::new();
    for m in maps {
        if let Some((facts, actions)) = pdg::split_map(&pdg, &m) {
            let p = Permutation { facts, actions };
            debug_assert!(check_symmetry(task, &p));
            if !gens.contains(&p) {
                gens.push(p);
            }
        }
    }
    PermutationGroup::from_generators(gens)
}

/// Hill-climbs to a local ≺-minimum over generator images.
pub fn greedy_signature(state: &State, group: &PermutationGroup) -> State {
    let mut s = state.clone();
    loop {
        let best = group.generators.iter().map(|g| g.apply(&s)).min();
        match best {
            Some(b) if b < s => s = b,
            _ => return s,
        }
    }
}

/// The ≺-least state of the orbit.
pub fn canonical_signature(state: &State, group: &PermutationGroup, cap: usize) -> Result<State, OrbitBudgetExceeded> {
    Ok(group
        .orbit(state, cap)?
        .into_iter()
        .min()
        .expect("orbit contains the state"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetryMode {
    Greedy,
    Canonical { orbit_budget: usize },
}

impl std::str::FromStr for SymmetryMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "greedy" => Ok(SymmetryMode::Greedy),
            "canonical" => Ok(SymmetryMode::Canonical {
                orbit_budget: DEFAULT_ORBIT_BUDGET,
            }),
            _ => Err(format!("unknown symmetry mode `{s}`")),
        }
    }
}

/// Memoizing state signature over a fixed group. Canonical signatures that
/// exceed the orbit budget fall back to the greedy one.
pub struct SymmetrySignature {
    group: PermutationGroup,
    mode: SymmetryMode,
    memo: RwLock<HashMap<State, State>>,
    fallbacks: AtomicU64,
}

impl SymmetrySignature {
    pub fn new(group: PermutationGroup, mode: SymmetryMode) -> Self {
        SymmetrySignature {
            group,
            mode,
            memo: RwLock::new(HashMap::new()),
            fallbacks: AtomicU64::new(0),
        }
    }

    pub fn group(&self) -> &PermutationGroup {
        &self.group
    }

    /// Canonical lookups that fell back to greedy.
    pub fn fallbacks(&self) -> u64 {
        self.fallbacks.load(Ordering::Relaxed)
    }
}

impl StateSignature for SymmetrySignature {
    fn signature(&self, state: &State) -> State {
        if let Some(s) = self.memo.read().get(state) {
            return s.clone();
        }
        let (sig, orbit) = match self.mode {
            SymmetryMode::Greedy => (greedy_signature(state, &self.group), None),
            SymmetryMode::Canonical { orbit_budget } => match self.group.orbit(state, orbit_budget) {
                Ok(orbit) => (orbit.iter().min().unwrap().clone(), Some(orbit)),
                Err(_) => {
                    self.fallbacks.fetch_add(1, Ordering::Relaxed);
                    (greedy_signature(state, &self.group), None)
                }
            },
        };
        let mut memo = self.memo.write();
        // every orbit member shares the canonical signature
        for s in orbit.into_iter().flatten() {
            memo.insert(s, sig.clone());
        }
        memo.insert(state.clone(), sig.clone());
        sig
    }
}
