//! Turning a hollow policy ⟨D, F⟩ into a proper policy with domain D and
//! frontier inside F.
//!
//! States of D are mapped one at a time. A pair (s, a) is eligible when every
//! successor lies in D ∪ F and at least one lies in F or in an already mapped
//! state. Among eligible pairs the lowest state is chosen, then the lowest
//! action id.

use std::collections::{BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::policy::{Policy, StateId, StateSpace};
use crate::task::ActionId;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConcretizeError {
    #[error("invalid hollow policy: {0}")]
    InvalidInput(&'static str),
}

/// Sets D and F of a hollow policy.
#[derive(Clone, Debug, Default)]
pub struct HollowPolicy {
    pub domain: HashSet<StateId>,
    pub front: HashSet<StateId>,
}

impl HollowPolicy {
    pub fn new(domain: impl IntoIterator<Item = StateId>, front: impl IntoIterator<Item = StateId>) -> Self {
        HollowPolicy {
            domain: domain.into_iter().collect(),
            front: front.into_iter().collect(),
        }
    }

    fn check(&self, space: &StateSpace<'_>) -> Result<(), ConcretizeError> {
        if !self.domain.is_disjoint(&self.front) {
            return Err(ConcretizeError::InvalidInput("domain and frontier overlap"));
        }
        if self.domain.iter().any(|&s| space.is_goal(s)) {
            return Err(ConcretizeError::InvalidInput("domain contains a goal state"));
        }
        Ok(())
    }
}

struct Ctx<'a, 's> {
    space: &'a StateSpace<'s>,
    hollow: &'a HollowPolicy,
    goal_merging: bool,
}

impl Ctx<'_, '_> {
    fn in_front(&self, t: StateId) -> bool {
        self.hollow.front.contains(&t) || (self.goal_merging && self.space.is_goal(t))
    }

    fn closed(&self, succ: &[StateId]) -> bool {
        succ.iter().all(|t| self.hollow.domain.contains(t) || self.in_front(*t))
    }

    fn escapes(&self, succ: &[StateId], handled: &HashSet<StateId>) -> bool {
        succ.iter().any(|t| handled.contains(t) || self.in_front(*t))
    }

    fn sorted_domain(&self) -> Vec<StateId> {
        let mut d: Vec<StateId> = self.hollow.domain.iter().copied().collect();
        d.sort_by(|&a, &b| self.space.cmp_states(a, b));
        d
    }

    fn build(&self, order: Vec<(StateId, ActionId)>) -> Policy {
        let p = Policy::from_mappings(self.space, order).expect("eligible pairs are applicable");
        debug_assert!(p.is_proper());
        p
    }
}

/// Key ordering candidates by state under ≺, then action id.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Key {
    rank: usize,
    action: ActionId,
}

/// Worklist implementation. Returns `Ok(None)` when no such policy exists.
pub fn concretize(
    space: &StateSpace<'_>,
    hollow: &HollowPolicy,
    goal_merging: bool,
) -> Result<Option<Policy>, ConcretizeError> {
    hollow.check(space)?;
    let ctx = Ctx {
        space,
        hollow,
        goal_merging,
    };
    let domain = ctx.sorted_domain();

    // Closed candidates and, for each state, the candidates it may unlock.
    let mut waiting: HashMap<StateId, Vec<Key>> = HashMap::new();
    let mut ready: BTreeSet<Key> = BTreeSet::new();
    for (i, &s) in domain.iter().enumerate() {
        for &a in space.applicable(s).iter() {
            let succ = space.successors(s, a).expect("applicable");
            if !ctx.closed(&succ) {
                continue;
            }
            let key = Key { rank: i, action: a };
            if succ.iter().any(|&t| ctx.in_front(t)) {
                ready.insert(key);
            } else {
                for &t in succ.iter() {
                    waiting.entry(t).or_default().push(key);
                }
            }
        }
    }

    let mut handled: Vec<bool> = vec![false; domain.len()];
    let mut order = Vec::with_capacity(domain.len());
    while order.len() < domain.len() {
        let Some(key) = ready.pop_first() else {
            return Ok(None);
        };
        if handled[key.rank] {
            continue;
        }
        handled[key.rank] = true;
        let s = domain[key.rank];
        order.push((s, key.action));
        for k in waiting.remove(&s).unwrap_or_default() {
            if !handled[k.rank] {
                ready.insert(k);
            }
        }
    }
    Ok(Some(ctx.build(order)))
}

/// Rescan implementation with a pluggable choice among eligible pairs.
/// `choose` receives the eligible pairs sorted by state and action and
/// returns the index of the one to take.
pub fn concretize_with_choice(
    space: &StateSpace<'_>,
    hollow: &HollowPolicy,
    goal_merging: bool,
    mut choose: impl FnMut(&[(StateId, ActionId)]) -> usize,
) -> Result<Option<Policy>, ConcretizeError> {
    hollow.check(space)?;
    let ctx = Ctx {
        space,
        hollow,
        goal_merging,
    };
    let mut remaining = ctx.sorted_domain();
    let mut handled: HashSet<StateId> = HashSet::new();
    let mut order = Vec::new();
    while !remaining.is_empty() {
        let mut eligible = Vec::new();
        for &s in &remaining {
            for &a in space.applicable(s).iter() {
                let succ = space.successors(s, a).expect("applicable");
                if ctx.closed(&succ) && ctx.escapes(&succ, &handled) {
                    eligible.push((s, a));
                }
            }
        }
        if eligible.is_empty() {
            return Ok(None);
        }
        let (s, a) = eligible[choose(&eligible)];
        remaining.retain(|&x| x != s);
        handled.insert(s);
        order.push((s, a));
    }
    Ok(Some(ctx.build(order)))
}

/// Reference implementation with the default choice.
pub fn concretize_naive(
    space: &StateSpace<'_>,
    hollow: &HollowPolicy,
    goal_merging: bool,
) -> Result<Option<Policy>, ConcretizeError> {
    concretize_with_choice(space, hollow, goal_merging, |_| 0)
}
