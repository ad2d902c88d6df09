use std::collections::HashMap;

use crate::policy::{Policy, StateId, StateSpace};
use crate::task::{ActionId, State};

/// Equivalence relation used to prune popped policies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pruning {
    Identity,
    Lanes,
    DomainFrontier,
    Frontier,
    FrontierSymmetric,
}

impl Pruning {
    pub const ALL: [Pruning; 5] = [
        Pruning::Identity,
        Pruning::Lanes,
        Pruning::DomainFrontier,
        Pruning::Frontier,
        Pruning::FrontierSymmetric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pruning::Identity => "identity",
            Pruning::Lanes => "lanes",
            Pruning::DomainFrontier => "domain-frontier",
            Pruning::Frontier => "frontier",
            Pruning::FrontierSymmetric => "frontier-sym",
        }
    }

    /// Frontier-based pruning can discard every solution.
    pub fn needs_backup(self) -> bool {
        matches!(self, Pruning::Frontier | Pruning::FrontierSymmetric)
    }
}

impl std::str::FromStr for Pruning {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Pruning::ALL
            .into_iter()
            .find(|p| p.name() == s || (s == "frontier_symmetric" && *p == Pruning::FrontierSymmetric))
            .ok_or_else(|| format!("unknown pruning `{s}`"))
    }
}

/// Maps a state to a representative of its symmetry class.
pub trait StateSignature: Send + Sync {
    fn signature(&self, state: &State) -> State;
}

/// Stand-in id for all goal states when goals are merged.
pub const MERGED_GOAL: StateId = StateId(u32::MAX);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SymKey {
    Goal,
    State(State),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SignatureKey {
    Identity(Vec<(StateId, ActionId)>),
    Lanes(Vec<(StateId, Vec<StateId>)>),
    DomainFrontier(Vec<StateId>, Vec<StateId>),
    Frontier(Vec<StateId>),
    FrontierSymmetric(Vec<SymKey>),
}

pub(crate) struct SignatureBuilder<'a> {
    pub pruning: Pruning,
    pub goal_merging: bool,
    pub symmetry: Option<&'a dyn StateSignature>,
    pub memo: HashMap<StateId, State>,
}

impl SignatureBuilder<'_> {
    fn merge(&self, space: &StateSpace<'_>, ids: impl Iterator<Item = StateId>) -> Vec<StateId> {
        let mut v: Vec<StateId> = ids
            .map(|s| {
                if self.goal_merging && space.is_goal(s) {
                    MERGED_GOAL
                } else {
                    s
                }
            })
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn key(&mut self, space: &StateSpace<'_>, policy: &Policy) -> SignatureKey {
        match self.pruning {
            Pruning::Identity => SignatureKey::Identity(policy.sorted_mappings()),
            Pruning::Lanes => {
                let lanes = policy
                    .lanes(space)
                    .into_iter()
                    .map(|(s, esc)| (s, self.merge(space, esc.into_iter())))
                    .collect();
                SignatureKey::Lanes(lanes)
            }
            Pruning::DomainFrontier => {
                let mut d: Vec<StateId> = policy.domain().collect();
                d.sort_unstable();
                SignatureKey::DomainFrontier(d, self.merge(space, policy.front().iter().copied()))
            }
            Pruning::Frontier => SignatureKey::Frontier(self.merge(space, policy.front().iter().copied())),
            Pruning::FrontierSymmetric => {
                let sym = self.symmetry.expect("frontier-sym pruning needs a symmetry context");
                let mut keys = Vec::new();
                let mut goal_seen = false;
                for &s in policy.front() {
                    if self.goal_merging && space.is_goal(s) {
                        if !goal_seen {
                            keys.push(SymKey::Goal);
                            goal_seen = true;
                        }
                        continue;
                    }
                    let c = self
                        .memo
                        .entry(s)
                        .or_insert_with(|| sym.signature(&space.state(s)))
                        .clone();
                    keys.push(SymKey::State(c));
                }
                keys.sort_by(|a, b| match (a, b) {
                    (SymKey::Goal, SymKey::Goal) => std::cmp::Ordering::Equal,
                    (SymKey::Goal, _) => std::cmp::Ordering::Less,
                    (_, SymKey::Goal) => std::cmp::Ordering::Greater,
                    (SymKey::State(x), SymKey::State(y)) => x.cmp(y),
                });
                SignatureKey::FrontierSymmetric(keys)
            }
        }
    }
}

/// Signature of a single policy, without memoization.
pub fn signature(
    space: &StateSpace<'_>,
    policy: &Policy,
    pruning: Pruning,
    goal_merging: bool,
    symmetry: Option<&dyn StateSignature>,
) -> SignatureKey {
    SignatureBuilder {
        pruning,
        goal_merging,
        symmetry,
        memo: HashMap::new(),
    }
    .key(space, policy)
}
